#include "qbm/gaussian.hpp"

#include "qbm/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qbm::gaussian {

namespace {

constexpr double kMinDeterminant = 1e-300;

double cov_scale(const Matrix& cov) {
    return std::max(1.0, max_abs(cov));
}

void check_same_size(const GaussianState& a, const GaussianState& b, const char* what) {
    if (a.n_modes() != b.n_modes()) throw DimensionError(std::string(what) + ": states have different mode counts");
}

Matrix sym_sqrt(const Matrix& m, bool inverse) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector d = es.eigenvalues();
    if (!(d(0) > 0.0)) throw ConditioningError("covariance is not positive definite");
    d = d.cwiseSqrt();
    if (inverse) d = d.cwiseInverse();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// prod_i lambda_i^(-1/2) over eigenvalues of a complex symmetric matrix whose
// Hermitian part is positive definite (all eigenvalues in the right half-plane).
Complex inv_sqrt_det(const CMatrix& w) {
    Eigen::ComplexEigenSolver<CMatrix> es(w, false);
    if (es.info() != Eigen::Success) throw ConditioningError("eigensolver failed in Gaussian integral");
    Complex out{1.0, 0.0};
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out /= std::sqrt(es.eigenvalues()(i));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

GaussianState::GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0 || mean_.size() % 2 != 0) throw DimensionError("GaussianState: mean must have positive even length");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
        throw DimensionError("GaussianState: covariance size does not match mean");
    if (!mean_.allFinite() || !cov_.allFinite()) throw ConditioningError("GaussianState: non-finite entries");
    const double scale = cov_scale(cov_);
    if (max_abs(cov_ - cov_.transpose()) > 1e-12 * scale) throw DomainError("GaussianState: covariance not symmetric");
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

    const int n = n_modes();
    const CMatrix hermitian = cov_.cast<Complex>() + Complex(0.0, 0.5) * symplectic_form(n).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian, Eigen::EigenvaluesOnly);
    const double lowest = es.eigenvalues()(0);
    if (lowest < -1e-10 * scale) {
        std::ostringstream os;
        os << "GaussianState: covariance violates the uncertainty relation (eigenvalue " << lowest << ")";
        throw DomainError(os.str());
    }
}

Vector GaussianState::symplectic_eigenvalues() const {
    return gaussian::symplectic_eigenvalues(cov_);
}

bool GaussianState::is_pure(double tol) const {
    const Vector nu = symplectic_eigenvalues();
    return ((nu.array() - 0.5).abs() <= tol).all();
}

GaussianState coherent_state(int n_modes, int mode, double x, double p, ModeWidth width) {
    if (n_modes < 1) throw DomainError("coherent_state: n_modes must be >= 1");
    if (mode < 0 || mode >= n_modes) throw DomainError("coherent_state: mode index out of range");
    if (!(width.mass > 0.0) || !(width.omega > 0.0)) throw DomainError("coherent_state: width mass and omega must be positive");
    Vector mean = Vector::Zero(2 * n_modes);
    mean(mode) = x;
    mean(n_modes + mode) = p;
    Matrix cov = 0.5 * Matrix::Identity(2 * n_modes, 2 * n_modes);
    cov(mode, mode) = 1.0 / (2.0 * width.mass * width.omega);
    cov(n_modes + mode, n_modes + mode) = width.mass * width.omega / 2.0;
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState thermal_state(std::span<const ModeWidth> modes, double temperature) {
    if (modes.empty()) throw DomainError("thermal_state: no modes");
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw DomainError("thermal_state: temperature must be >= 0");
    const auto n = static_cast<Eigen::Index>(modes.size());
    Matrix cov = Matrix::Zero(2 * n, 2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const ModeWidth& w = modes[static_cast<std::size_t>(k)];
        if (!(w.mass > 0.0) || !(w.omega > 0.0)) throw DomainError("thermal_state: mass and omega must be positive");
        const double occ = temperature == 0.0 ? 1.0 : 1.0 / std::tanh(w.omega / (2.0 * temperature));
        cov(k, k) = occ / (2.0 * w.mass * w.omega);
        cov(n + k, n + k) = w.mass * w.omega * occ / 2.0;
    }
    return GaussianState(Vector::Zero(2 * n), std::move(cov));
}

GaussianState product(const GaussianState& a, const GaussianState& b) {
    return GaussianState(phase_space_concat(a.mean(), b.mean()), phase_space_direct_sum(a.cov(), b.cov()));
}

GaussianState displaced(const GaussianState& s, const Vector& shift) {
    if (shift.size() != s.mean().size()) throw DimensionError("displaced: size mismatch");
    return GaussianState(s.mean() + shift, s.cov());
}

// ---------------------------------------------------------------------------

Vector symplectic_eigenvalues(const Matrix& cov) {
    const Eigen::Index dim = cov.rows();
    if (dim == 0 || dim % 2 != 0 || cov.cols() != dim) throw DimensionError("symplectic_eigenvalues: bad matrix size");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw ConditioningError("symplectic_eigenvalues: matrix is not positive definite");
    const Matrix l = llt.matrixL();
    // L^T Omega L is similar to Omega sigma; i times it is Hermitian with spectrum +-nu
    const Matrix a = l.transpose() * symplectic_form(static_cast<int>(dim / 2)) * l;
    const CMatrix h = Complex(0.0, 1.0) * a.cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().tail(dim / 2);
}

WilliamsonDecomposition williamson(const Matrix& cov) {
    const Eigen::Index dim = cov.rows();
    const Eigen::Index n = dim / 2;
    const Matrix root = sym_sqrt(cov, false);
    const Matrix iroot = sym_sqrt(cov, true);
    const Matrix k = iroot * symplectic_form(static_cast<int>(n)) * iroot;
    const CMatrix h = Complex(0.0, 1.0) * k.cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success) throw ConditioningError("williamson: eigensolver failed");

    // eigenvalues come in +-1/nu pairs; the positive half (ascending 1/nu) gives
    // v = (u + i w)/sqrt2 with K u = w/nu, K w = -u/nu
    Matrix o(dim, dim);
    Vector nu(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index c = dim - 1 - j;  // largest 1/nu first -> nu ascending
        const double lambda = es.eigenvalues()(c);
        if (!(lambda > 0.0)) throw ConditioningError("williamson: degenerate spectrum");
        const CVector v = es.eigenvectors().col(c);
        o.col(j) = std::numbers::sqrt2 * v.imag();
        o.col(n + j) = std::numbers::sqrt2 * v.real();
        nu(j) = 1.0 / lambda;
    }
    Vector scale(dim);
    scale << nu.cwiseSqrt().cwiseInverse(), nu.cwiseSqrt().cwiseInverse();
    return WilliamsonDecomposition{nu, root * o * scale.asDiagonal()};
}

GaussianState purify(const GaussianState& state) {
    const int n = state.n_modes();
    const WilliamsonDecomposition w = williamson(state.cov());

    Matrix core = Matrix::Zero(4 * n, 4 * n);
    const int m = 2 * n;
    for (int k = 0; k < n; ++k) {
        // rounding noise above 1/2 would otherwise become sqrt(noise) squeezing
        const double nu = w.nu(k) - 0.5 <= 1e-12 ? 0.5 : w.nu(k);
        const double c = std::sqrt(nu * nu - 0.25);
        const int a = n + k;  // ancilla partner
        core(k, k) = nu;
        core(m + k, m + k) = nu;
        core(a, a) = nu;
        core(m + a, m + a) = nu;
        core(k, a) = core(a, k) = c;
        core(m + k, m + a) = core(m + a, m + k) = -c;
    }
    const Matrix s = extend_symplectic(w.s, n);
    Matrix cov = s * core * s.transpose();
    Vector mean = phase_space_concat(state.mean(), Vector::Zero(2 * n));
    return GaussianState(std::move(mean), std::move(cov));
}

// ---------------------------------------------------------------------------

Matrix propagator(const model::QuadraticHamiltonian& h, double t) {
    const Matrix a = h.dynamical_matrix() * t;
    return a.exp();
}

Matrix propagator_spectral(const model::QuadraticHamiltonian& h, double t) {
    Eigen::EigenSolver<Matrix> es(h.dynamical_matrix());
    if (es.info() != Eigen::Success) throw ConditioningError("propagator_spectral: eigensolver failed");
    const CMatrix v = es.eigenvectors();
    Eigen::PartialPivLU<CMatrix> lu(v);
    const Eigen::JacobiSVD<CMatrix> svd(v);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 0.0) || sv(0) / sv(sv.size() - 1) > 1e8)
        throw ConditioningError("propagator_spectral: dynamical matrix is not diagonalizable to working precision");
    const CVector phase = (es.eigenvalues() * t).array().exp();
    const CMatrix s = v * phase.asDiagonal() * lu.inverse();
    return s.real();
}

Matrix extend_symplectic(const Matrix& s, int extra_modes) {
    if (extra_modes == 0) return s;
    return phase_space_direct_sum(s, Matrix::Identity(2 * extra_modes, 2 * extra_modes));
}

GaussianState evolve(const GaussianState& state, const Matrix& s) {
    if (s.rows() != state.mean().size() || s.cols() != state.mean().size())
        throw DimensionError("evolve: symplectic size does not match state");
    Matrix cov = s * state.cov() * s.transpose();
    return GaussianState(s * state.mean(), 0.5 * (cov + cov.transpose()));
}

// ---------------------------------------------------------------------------

GaussianState reduce(const GaussianState& state, const ModeSet& keep) {
    const ModeSet modes = checked_modes(keep, state.n_modes(), "reduce");
    const auto idx = quadrature_indices(modes, state.n_modes());
    return GaussianState(select(state.mean(), idx), select(state.cov(), idx, idx));
}

double purity(const GaussianState& state) {
    Eigen::LLT<Matrix> llt(state.cov());
    if (llt.info() != Eigen::Success) throw ConditioningError("purity: covariance is not positive definite");
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    if (log_det < std::log(kMinDeterminant))
        throw ConditioningError("purity: det(sigma) below 1e-300");
    const int n = state.n_modes();
    return std::exp(-n * std::numbers::ln2 - 0.5 * log_det);
}

double log_negativity(const GaussianState& state, const ModeSet& party_a) {
    const int n = state.n_modes();
    const ModeSet a = checked_modes(party_a, n, "log_negativity");
    if (static_cast<int>(a.size()) == n) throw DomainError("log_negativity: party A must be a proper subset");
    Vector flip = Vector::Ones(2 * n);
    for (int k : a) flip(n + k) = -1.0;
    const Matrix transposed = flip.asDiagonal() * state.cov() * flip.asDiagonal();
    const Vector nu = symplectic_eigenvalues(transposed);
    double total = 0.0;
    for (Eigen::Index k = 0; k < nu.size(); ++k) total += std::max(0.0, -std::log2(2.0 * nu(k)));
    return total;
}

// ---------------------------------------------------------------------------

PositionWavefunction position_wavefunction(const GaussianState& state) {
    if (!state.is_pure()) throw DomainError("position_wavefunction: state is mixed");
    const int n = state.n_modes();
    const Matrix xx = state.cov().topLeftCorner(n, n);
    const Matrix xp = state.cov().topRightCorner(n, n);
    Eigen::LLT<Matrix> llt(xx);
    if (llt.info() != Eigen::Success) throw ConditioningError("position_wavefunction: singular position covariance");
    const Matrix xx_inv = llt.solve(Matrix::Identity(n, n));
    const Matrix re = 0.5 * xx_inv;
    Matrix im = -xx_inv * xp;
    im = 0.5 * (im + im.transpose()).eval();
    CMatrix z(n, n);
    z.real() = 0.5 * (re + re.transpose());
    z.imag() = im;
    return PositionWavefunction{std::move(z), state.mean().head(n), state.mean().tail(n)};
}

Complex overlap(const GaussianState& a, const GaussianState& b) {
    check_same_size(a, b, "overlap");
    const int n = a.n_modes();
    const PositionWavefunction wa = position_wavefunction(a);
    const PositionWavefunction wb = position_wavefunction(b);
    const Complex i{0.0, 1.0};

    const CMatrix za = wa.z.conjugate();
    const CMatrix w = za + wb.z;
    const CVector qa = wa.q.cast<Complex>();
    const CVector qb = wb.q.cast<Complex>();
    const CVector j = za * qa + wb.z * qb + i * (wb.p - wa.p).cast<Complex>();
    const Complex c = -0.5 * qa.dot(za * qa) - 0.5 * qb.dot(wb.z * qb) - i * wb.p.dot(wb.q) / 2.0 +
                      i * wa.p.dot(wa.q) / 2.0;
    // CVector::dot conjugates its left operand; q is real so that is harmless above,
    // but J is complex and needs the bilinear form
    const CVector wj = w.partialPivLu().solve(j);
    const Complex quad = (j.transpose() * wj)(0, 0);

    const double log_na = 0.25 * (std::log(wa.z.real().determinant()) - n * std::log(std::numbers::pi));
    const double log_nb = 0.25 * (std::log(wb.z.real().determinant()) - n * std::log(std::numbers::pi));
    const Complex pref = std::exp(log_na + log_nb + 0.5 * n * std::log(2.0 * std::numbers::pi)) * inv_sqrt_det(w);
    return pref * std::exp(0.5 * quad + c);
}

double overlap_magnitude(const GaussianState& a, const GaussianState& b) {
    check_same_size(a, b, "overlap_magnitude");
    if (!a.is_pure() || !b.is_pure()) throw DomainError("overlap_magnitude: mixed-state input");
    const Matrix sum = a.cov() + b.cov();
    Eigen::LLT<Matrix> llt(sum);
    if (llt.info() != Eigen::Success) throw ConditioningError("overlap_magnitude: singular covariance sum");
    const Vector d = a.mean() - b.mean();
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double expo = -0.5 * d.dot(llt.solve(d));
    return std::exp(0.5 * (-0.5 * log_det + expo));
}

GaussianState condition_on_coherent(const GaussianState& state, const ModeSet& measured_in,
                                    const Vector& outcome, ModeWidth probe) {
    const int n = state.n_modes();
    const ModeSet measured = checked_modes(measured_in, n, "condition_on_coherent");
    const ModeSet rest = complement(measured, n);
    if (rest.empty()) throw DomainError("condition_on_coherent: nothing left after measurement");
    if (outcome.size() != static_cast<Eigen::Index>(2 * measured.size()))
        throw DimensionError("condition_on_coherent: outcome length must be 2 * |measured|");
    if (!(probe.mass > 0.0) || !(probe.omega > 0.0)) throw DomainError("condition_on_coherent: bad probe width");

    const auto mi = quadrature_indices(measured, n);
    const auto ri = quadrature_indices(rest, n);
    const Matrix s_mm = select(state.cov(), mi, mi);
    const Matrix s_rr = select(state.cov(), ri, ri);
    const Matrix s_rm = select(state.cov(), ri, mi);

    const auto nm = static_cast<Eigen::Index>(measured.size());
    Vector probe_diag(2 * nm);
    probe_diag << Vector::Constant(nm, 1.0 / (2.0 * probe.mass * probe.omega)),
        Vector::Constant(nm, probe.mass * probe.omega / 2.0);
    const Matrix g = s_mm + Matrix(probe_diag.asDiagonal());
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) throw ConditioningError("condition_on_coherent: singular conditioning matrix");

    Matrix cov = s_rr - s_rm * llt.solve(s_rm.transpose());
    Vector mean = select(state.mean(), ri) + s_rm * llt.solve(outcome - select(state.mean(), mi));
    return GaussianState(std::move(mean), 0.5 * (cov + cov.transpose()));
}

// ---------------------------------------------------------------------------

CatState::CatState(std::vector<Branch> branches, Matrix cov, bool)
    : branches_(std::move(branches)), cov_(std::move(cov)) {}

CatState::CatState(std::vector<Branch> branches, Matrix cov) : branches_(std::move(branches)), cov_(std::move(cov)) {
    if (branches_.size() < 2) throw DomainError("CatState: at least two branches are required");
    for (const auto& b : branches_)
        if (b.mean.size() != cov_.rows()) throw DimensionError("CatState: branch mean size does not match covariance");
    if (!branch_state(0).is_pure()) throw DomainError("CatState: shared covariance must be pure");
    const double nrm = norm();
    if (!(nrm > 1e-12)) throw DomainError("CatState: superposition has zero norm");
    for (auto& b : branches_) b.amplitude /= nrm;
}

GaussianState CatState::branch_state(std::size_t k) const {
    return GaussianState(branches_.at(k).mean, cov_);
}

double CatState::norm() const {
    Complex total{0.0, 0.0};
    for (std::size_t j = 0; j < branches_.size(); ++j) {
        const GaussianState gj = branch_state(j);
        for (std::size_t k = 0; k < branches_.size(); ++k) {
            const Complex ov = j == k ? Complex{1.0, 0.0} : overlap(gj, branch_state(k));
            total += std::conj(branches_[j].amplitude) * branches_[k].amplitude * ov;
        }
    }
    return std::sqrt(std::max(total.real(), 0.0));
}

CatState evolve(const CatState& cat, const Matrix& s) {
    if (s.rows() != cat.cov().rows() || s.cols() != cat.cov().cols())
        throw DimensionError("evolve: symplectic size does not match cat state");
    std::vector<Branch> out;
    for (const auto& b : cat.branches()) out.push_back(Branch{b.amplitude, s * b.mean});
    Matrix cov = s * cat.cov() * s.transpose();
    // amplitudes already normalized; unitary evolution keeps the norm
    return CatState(std::move(out), 0.5 * (cov + cov.transpose()), true);
}

double decoherence_factor(const CatState& cat, const ModeSet& env_in, ModeWidth probe) {
    if (cat.branches().size() != 2) throw DomainError("decoherence_factor: exactly two branches are required");
    const int n = cat.n_modes();
    const ModeSet env = checked_modes(env_in, n, "decoherence_factor");
    const ModeSet system = complement(env, n);
    if (system.empty()) throw DomainError("decoherence_factor: environment covers every mode");
    const GaussianState g0 = cat.branch_state(0);
    if (!g0.is_pure()) throw DomainError("decoherence_factor: global state is mixed (purify the bath first)");
    const GaussianState g1 = cat.branch_state(1);

    const auto si = quadrature_indices(system, n);
    const GaussianState e0 = condition_on_coherent(g0, system, select(g0.mean(), si), probe);
    const GaussianState e1 = condition_on_coherent(g1, system, select(g1.mean(), si), probe);
    return std::min(1.0, overlap_magnitude(e0, e1));
}

} // namespace qbm::gaussian
