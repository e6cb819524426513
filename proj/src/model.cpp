#include "qbm/model.hpp"

#include "qbm/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace qbm::model {

namespace {

void require_positive(double value, const std::string& field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << field << " must be positive and finite (got " << value << ")";
        throw DomainError(os.str());
    }
}

} // namespace

std::vector<double> ModelParams::masses() const {
    std::vector<double> out{m1};
    for (const auto& b : bath) out.push_back(b.mass);
    return out;
}

void ModelParams::validate() const {
    require_positive(m1, "m1");
    if (const auto* h = std::get_if<HarmonicPotential>(&potential)) require_positive(h->omega, "omega");
    if (bath.empty()) throw DomainError("bath: at least one bath mode is required");
    for (std::size_t i = 0; i < bath.size(); ++i) {
        const std::string tag = "bath[" + std::to_string(i) + "].";
        require_positive(bath[i].mass, tag + "mass");
        require_positive(bath[i].omega, tag + "omega");
        if (!std::isfinite(bath[i].coupling)) throw DomainError(tag + "coupling must be finite");
    }
}

// ---------------------------------------------------------------------------

QuadraticHamiltonian::QuadraticHamiltonian(Matrix k) {
    if (k.rows() != k.cols() || k.rows() % 2 != 0 || k.rows() == 0) {
        throw DimensionError("QuadraticHamiltonian: K must be square with positive even size");
    }
    const double asym = max_abs(k - k.transpose());
    if (!(asym <= kSymmetryTolerance)) {
        std::ostringstream os;
        os << "QuadraticHamiltonian: K not symmetric (max |K - K^T| = " << asym << ")";
        throw DomainError(os.str());
    }
    n_ = static_cast<int>(k.rows() / 2);
    k_ = 0.5 * (k + k.transpose());
}

Matrix QuadraticHamiltonian::dynamical_matrix() const {
    return symplectic_form(n_) * k_;
}

double QuadraticHamiltonian::value(const Vector& z) const {
    if (z.size() != k_.rows()) throw DimensionError("QuadraticHamiltonian::value: size mismatch");
    return 0.5 * z.dot(k_ * z);
}

double QuadraticHamiltonian::expectation(const Vector& mean, const Matrix& cov) const {
    if (mean.size() != k_.rows() || cov.rows() != k_.rows() || cov.cols() != k_.cols())
        throw DimensionError("QuadraticHamiltonian::expectation: size mismatch");
    return 0.5 * ((k_ * cov).trace() + mean.dot(k_ * mean));
}

double QuadraticHamiltonian::min_potential_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(position_block(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

QuadraticHamiltonian build_qbm_hamiltonian(const ModelParams& params) {
    params.validate();
    const int n = params.n_modes();
    Matrix k = Matrix::Zero(2 * n, 2 * n);

    k(n, n) = 1.0 / params.m1;
    if (const auto* h = std::get_if<HarmonicPotential>(&params.potential))
        k(0, 0) = params.m1 * h->omega * h->omega;

    const double sign = sign_value(params.coupling_sign);
    for (int i = 1; i < n; ++i) {
        const BathMode& b = params.bath[static_cast<std::size_t>(i - 1)];
        k(n + i, n + i) = 1.0 / b.mass;
        k(i, i) = b.mass * b.omega * b.omega;
        // 1/2 z^T K z picks up K(0,i) + K(i,0), reproducing sign * kappa * x_1 x_2i
        k(0, i) = sign * b.coupling;
        k(i, 0) = sign * b.coupling;
    }

    QuadraticHamiltonian h(std::move(k));
    const double lowest = h.min_potential_eigenvalue();
    if (lowest < 0.0) {
        std::ostringstream os;
        os << "potential block is indefinite (lowest eigenvalue " << lowest
           << "); dynamics will contain growing modes";
        warn(os.str());
    }
    return h;
}

// ---------------------------------------------------------------------------

void BathSpec::validate() const {
    if (n_modes < 1) throw DomainError("bath_modes must be >= 1");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be >= 0");
    require_positive(cutoff, "cutoff");
}

std::vector<BathMode> discretize_bath(const BathSpec& spec, double mass) {
    spec.validate();
    require_positive(mass, "bath_mass");
    const int n = spec.n_modes;
    std::vector<double> omega(static_cast<std::size_t>(n));
    std::vector<double> spacing(static_cast<std::size_t>(n));

    if (spec.scheme == GridScheme::Linear || n == 1) {
        const double dw = spec.cutoff / n;
        for (int i = 0; i < n; ++i) {
            omega[static_cast<std::size_t>(i)] = dw * (i + 1);
            spacing[static_cast<std::size_t>(i)] = dw;
        }
        // exact grid end, independent of rounding in dw * n
        omega.back() = spec.cutoff;
    } else {
        const double lo = spec.cutoff / n;
        const double log_ratio = std::log(spec.cutoff / lo) / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double w = lo * std::exp(log_ratio * i);
            omega[static_cast<std::size_t>(i)] = w;
            spacing[static_cast<std::size_t>(i)] = w * log_ratio;
        }
        omega.back() = spec.cutoff;
        spacing.back() = spec.cutoff * log_ratio;
    }

    std::vector<BathMode> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double k2 = 2.0 / std::numbers::pi * mass * spec.gamma * omega[i] * omega[i] * spacing[i];
        out.push_back(BathMode{mass, omega[i], std::sqrt(k2)});
    }
    return out;
}

// ---------------------------------------------------------------------------

BrownianForm read_brownian_form(const QuadraticHamiltonian& h, int system_mode) {
    const int n = h.n_modes();
    if (system_mode < 0 || system_mode >= n) throw DomainError("read_brownian_form: bad system mode");
    const Matrix& k = h.k();
    const double scale = k.diagonal().cwiseAbs().maxCoeff();
    const double norm = scale > 0.0 ? scale : 1.0;

    BrownianForm form;
    form.system_mode = system_mode;
    form.system_mass = 1.0 / k(n + system_mode, n + system_mode);
    form.system_stiffness = k(system_mode, system_mode);

    const int xs = system_mode;
    const int ps = n + system_mode;
    for (int j = 0; j < 2 * n; ++j) {
        const bool env_position = j < n && j != xs;
        if (j != xs && !env_position) form.system_leak = std::max(form.system_leak, std::abs(k(xs, j)));
        if (j != ps) form.system_leak = std::max(form.system_leak, std::abs(k(ps, j)));
    }
    form.system_leak /= norm;

    for (int a = 0; a < n; ++a) {
        if (a == system_mode) continue;
        form.env_modes.push_back(a);
        form.env_mass.push_back(1.0 / k(n + a, n + a));
        form.env_stiffness.push_back(k(a, a));
        form.coupling.push_back(k(xs, a));
        for (int b = 0; b < n; ++b) {
            if (b == system_mode) continue;
            double off = std::abs(k(a, n + b));  // x-p coupling, any pair
            if (b != a) off = std::max({off, std::abs(k(a, b)), std::abs(k(n + a, n + b))});
            form.env_offdiag = std::max(form.env_offdiag, off);
        }
    }
    form.env_offdiag /= norm;
    return form;
}

ModelParams read_back_params(const QuadraticHamiltonian& h, CouplingSign sign) {
    const BrownianForm form = read_brownian_form(h, 0);
    if (!form.system_couples_only_to_env_positions() || !form.env_decoupled())
        throw DomainError("read_back_params: Hamiltonian is not in Brownian form");

    ModelParams p;
    p.m1 = form.system_mass;
    if (form.system_stiffness == 0.0) {
        p.potential = FreePotential{};
    } else if (form.system_stiffness > 0.0) {
        p.potential = HarmonicPotential{std::sqrt(form.system_stiffness / form.system_mass)};
    } else {
        throw DomainError("read_back_params: negative particle stiffness");
    }
    p.coupling_sign = sign;
    for (std::size_t a = 0; a < form.env_modes.size(); ++a) {
        if (!(form.env_stiffness[a] > 0.0)) throw DomainError("read_back_params: bath stiffness not positive");
        p.bath.push_back(BathMode{form.env_mass[a], std::sqrt(form.env_stiffness[a] / form.env_mass[a]),
                                  sign_value(sign) * form.coupling[a]});
    }
    return p;
}

} // namespace qbm::model
