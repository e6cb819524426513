#include "qbm/fock.hpp"

#include "qbm/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace qbm::fock {

namespace {

constexpr int kMaxLevel = 255;

std::string key_of(std::span<const int> occ) {
    std::string key(occ.size(), '\0');
    for (std::size_t i = 0; i < occ.size(); ++i) key[i] = static_cast<char>(static_cast<unsigned char>(occ[i]));
    return key;
}

void check_cap(double dim, std::size_t cap) {
    if (dim > static_cast<double>(cap))
        throw DomainError("FockSpace: dimension " + std::to_string(static_cast<long long>(dim)) +
                          " exceeds cap " + std::to_string(cap));
}

// Apply a monomial to a basis occupation in place; returns the amplitude
// factor (0 if annihilated).
double apply_monomial(const Monomial& m, std::vector<int>& occ) {
    double amp = 1.0;
    for (auto it = m.ops.rbegin(); it != m.ops.rend(); ++it) {
        int& n = occ[static_cast<std::size_t>(it->mode)];
        if (it->dagger) {
            ++n;
            amp *= std::sqrt(static_cast<double>(n));
        } else {
            if (n == 0) return 0.0;
            amp *= std::sqrt(static_cast<double>(n));
            --n;
        }
    }
    return amp;
}

bool in_space(const FockSpace& space, const std::vector<int>& occ) {
    for (int n : occ)
        if (n > kMaxLevel) return false;
    return space.index_of(occ).has_value();
}

} // namespace

// ---------------------------------------------------------------------------

FockSpace FockSpace::per_mode(std::vector<int> cutoffs, std::size_t cap) {
    if (cutoffs.empty()) throw DomainError("FockSpace: at least one mode is required");
    double dim = 1.0;
    for (int c : cutoffs) {
        if (c < 1 || c > kMaxLevel + 1) throw DomainError("FockSpace: per-mode cutoff must be in [1, 256]");
        dim *= c;
    }
    check_cap(dim, cap);

    FockSpace s;
    s.n_modes_ = static_cast<int>(cutoffs.size());
    s.cutoffs_ = std::move(cutoffs);
    std::vector<int> occ(static_cast<std::size_t>(s.n_modes_), 0);
    const auto total = static_cast<std::size_t>(dim);
    s.occ_.reserve(total * occ.size());
    for (std::size_t idx = 0; idx < total; ++idx) {
        s.occ_.insert(s.occ_.end(), occ.begin(), occ.end());
        // odometer with mode 0 most significant
        for (int k = s.n_modes_ - 1; k >= 0; --k) {
            auto& n = occ[static_cast<std::size_t>(k)];
            if (++n < s.cutoffs_[static_cast<std::size_t>(k)]) break;
            n = 0;
        }
    }
    s.finish();
    return s;
}

FockSpace FockSpace::total(int n_modes, int max_total, std::size_t cap) {
    if (n_modes < 1) throw DomainError("FockSpace: at least one mode is required");
    if (max_total < 0 || max_total > kMaxLevel) throw DomainError("FockSpace: max_total must be in [0, 255]");
    // C(max_total + n, n)
    double dim = 1.0;
    for (int i = 1; i <= n_modes; ++i) dim = dim * (max_total + i) / i;
    check_cap(std::round(dim), cap);

    FockSpace s;
    s.n_modes_ = n_modes;
    s.max_total_ = max_total;
    s.cutoffs_.assign(static_cast<std::size_t>(n_modes), max_total + 1);
    std::vector<int> occ(static_cast<std::size_t>(n_modes), 0);
    // lexicographic enumeration of {occ : sum <= max_total}
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == n_modes) {
            s.occ_.insert(s.occ_.end(), occ.begin(), occ.end());
            return;
        }
        for (int n = 0; n <= left; ++n) {
            occ[static_cast<std::size_t>(k)] = n;
            rec(k + 1, left - n);
        }
        occ[static_cast<std::size_t>(k)] = 0;
    };
    rec(0, max_total);
    s.finish();
    return s;
}

void FockSpace::finish() {
    dim_ = occ_.size() / static_cast<std::size_t>(n_modes_);
    index_.reserve(dim_);
    std::vector<int> totals(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        const auto occ = occupation(i);
        index_.emplace(key_of(occ), i);
        int t = 0;
        for (int n : occ) t += n;
        totals[i] = t;
    }
    by_total_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) by_total_[i] = i;
    std::stable_sort(by_total_.begin(), by_total_.end(),
                     [&](std::size_t a, std::size_t b) { return totals[a] < totals[b]; });
}

std::optional<std::size_t> FockSpace::index_of(std::span<const int> occ) const {
    if (static_cast<int>(occ.size()) != n_modes_) return std::nullopt;
    for (int n : occ)
        if (n < 0 || n > kMaxLevel) return std::nullopt;
    const auto it = index_.find(key_of(occ));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------

Operator Operator::identity() { return Operator({Monomial{Complex{1.0, 0.0}, {}}}); }
Operator Operator::annihilate(int mode) { return Operator({Monomial{Complex{1.0, 0.0}, {Ladder{mode, false}}}}); }
Operator Operator::create(int mode) { return Operator({Monomial{Complex{1.0, 0.0}, {Ladder{mode, true}}}}); }

Operator Operator::position(int mode) {
    const double s = 1.0 / std::numbers::sqrt2;
    return Operator({Monomial{Complex{s, 0.0}, {Ladder{mode, false}}}, Monomial{Complex{s, 0.0}, {Ladder{mode, true}}}});
}

Operator Operator::momentum(int mode) {
    const double s = 1.0 / std::numbers::sqrt2;
    return Operator({Monomial{Complex{0.0, -s}, {Ladder{mode, false}}}, Monomial{Complex{0.0, s}, {Ladder{mode, true}}}});
}

Operator operator+(const Operator& a, const Operator& b) {
    auto terms = a.terms_;
    terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
    return Operator(std::move(terms));
}

Operator operator*(const Operator& a, const Operator& b) {
    std::vector<Monomial> terms;
    for (const auto& ta : a.terms_) {
        for (const auto& tb : b.terms_) {
            Monomial m{ta.coeff * tb.coeff, ta.ops};
            m.ops.insert(m.ops.end(), tb.ops.begin(), tb.ops.end());
            terms.push_back(std::move(m));
        }
    }
    return Operator(std::move(terms));
}

Operator operator*(Complex c, const Operator& a) {
    auto terms = a.terms_;
    for (auto& t : terms) t.coeff *= c;
    return Operator(std::move(terms));
}

CVector apply(const Operator& op, const FockSpace& space, const CVector& psi) {
    if (static_cast<std::size_t>(psi.size()) != space.dim()) throw DimensionError("apply: state size does not match space");
    CVector out = CVector::Zero(psi.size());
    std::vector<int> occ;
    for (std::size_t j = 0; j < space.dim(); ++j) {
        const Complex amp_j = psi(static_cast<Eigen::Index>(j));
        if (amp_j == Complex{0.0, 0.0}) continue;
        const auto base = space.occupation(j);
        for (const auto& term : op.terms()) {
            occ.assign(base.begin(), base.end());
            const double a = apply_monomial(term, occ);
            if (a == 0.0 || !in_space(space, occ)) continue;
            out(static_cast<Eigen::Index>(*space.index_of(occ))) += term.coeff * a * amp_j;
        }
    }
    return out;
}

Complex expectation(const Operator& op, const FockSpace& space, const CVector& psi) {
    return psi.dot(apply(op, space, psi));
}

Matrix dense_real(const Operator& op, const FockSpace& space) {
    const auto dim = static_cast<Eigen::Index>(space.dim());
    Matrix out = Matrix::Zero(dim, dim);
    Matrix imag = Matrix::Zero(dim, dim);
    std::vector<int> occ;
    for (std::size_t j = 0; j < space.dim(); ++j) {
        const auto base = space.occupation(j);
        for (const auto& term : op.terms()) {
            occ.assign(base.begin(), base.end());
            const double a = apply_monomial(term, occ);
            if (a == 0.0 || !in_space(space, occ)) continue;
            const auto i = static_cast<Eigen::Index>(*space.index_of(occ));
            out(i, static_cast<Eigen::Index>(j)) += term.coeff.real() * a;
            imag(i, static_cast<Eigen::Index>(j)) += term.coeff.imag() * a;
        }
    }
    if (max_abs(imag) > 1e-12 * std::max(1.0, max_abs(out)))
        throw DomainError("dense_real: operator has imaginary matrix elements");
    return out;
}

// ---------------------------------------------------------------------------

Matrix build_fock_hamiltonian(const model::ModelParams& params, const FockSpace& space) {
    params.validate();
    if (space.n_modes() != params.n_modes())
        throw DomainError("build_fock_hamiltonian: space has " + std::to_string(space.n_modes()) + " modes, model has " +
                          std::to_string(params.n_modes()));

    const auto x = Operator::position;
    const auto p = Operator::momentum;
    const auto c = [](double v) { return Complex{v, 0.0}; };

    // H_1
    Operator h = c(0.5 / params.m1) * (p(0) * p(0));
    if (const auto* pot = std::get_if<model::HarmonicPotential>(&params.potential))
        h = h + c(0.5 * params.m1 * pot->omega * pot->omega) * (x(0) * x(0));
    // H_2 and H_1+2
    const double sign = model::sign_value(params.coupling_sign);
    for (int i = 1; i < params.n_modes(); ++i) {
        const auto& b = params.bath[static_cast<std::size_t>(i - 1)];
        h = h + c(0.5 / b.mass) * (p(i) * p(i));
        h = h + c(0.5 * b.mass * b.omega * b.omega) * (x(i) * x(i));
        if (b.coupling != 0.0) h = h + c(sign * b.coupling) * (x(0) * x(i));
    }
    Matrix dense = dense_real(h, space);
    const double asym = max_abs(dense - dense.transpose());
    if (asym > 1e-12 * std::max(1.0, max_abs(dense)))
        throw ConditioningError("build_fock_hamiltonian: matrix is not Hermitian");
    return 0.5 * (dense + dense.transpose());
}

SpectralEvolver::SpectralEvolver(const Matrix& h) {
    if (h.rows() != h.cols() || h.rows() == 0) throw DimensionError("SpectralEvolver: H must be square");
    vectors_ = 0.5 * (h + h.transpose());
    energies_.resize(h.rows());
    const auto n = static_cast<lapack_int>(h.rows());
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, vectors_.data(), n, energies_.data());
    if (info != 0) throw ConditioningError("SpectralEvolver: dsyevd failed with info " + std::to_string(info));
}

FockState SpectralEvolver::evolve(const FockState& psi, double t) const {
    if (static_cast<std::size_t>(psi.amplitudes.size()) != dim()) throw DimensionError("evolve: state size does not match H");
    const CVector coeffs = vectors_.transpose().cast<Complex>() * psi.amplitudes;
    CVector phases(coeffs.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) phases(k) = std::polar(1.0, -energies_(k) * t) * coeffs(k);
    return FockState{vectors_.cast<Complex>() * phases};
}

FockState evolve_dense(const FockState& psi, const Matrix& h, double t) {
    if (static_cast<Eigen::Index>(psi.amplitudes.size()) != h.rows()) throw DimensionError("evolve_dense: size mismatch");
    return SpectralEvolver(h).evolve(psi, t);
}

// ---------------------------------------------------------------------------

ReducedDensity reduced_density(const FockState& psi, const FockSpace& space, const ModeSet& keep_in) {
    if (static_cast<std::size_t>(psi.amplitudes.size()) != space.dim())
        throw DimensionError("reduced_density: state size does not match space");
    const ModeSet keep = checked_modes(keep_in, space.n_modes(), "reduced_density");
    const ModeSet rest = complement(keep, space.n_modes());

    std::map<std::vector<int>, std::size_t> keep_idx;
    std::map<std::vector<int>, std::size_t> rest_idx;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> split(space.dim());
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto occ = space.occupation(i);
        for (int k : keep) split[i].first.push_back(occ[static_cast<std::size_t>(k)]);
        for (int k : rest) split[i].second.push_back(occ[static_cast<std::size_t>(k)]);
        keep_idx.emplace(split[i].first, 0);
        rest_idx.emplace(split[i].second, 0);
    }
    ReducedDensity out;
    out.modes = keep;
    std::size_t counter = 0;
    for (auto& [occ, idx] : keep_idx) {
        idx = counter++;
        out.basis.push_back(occ);
    }
    counter = 0;
    for (auto& [occ, idx] : rest_idx) idx = counter++;

    CMatrix table = CMatrix::Zero(static_cast<Eigen::Index>(keep_idx.size()), static_cast<Eigen::Index>(rest_idx.size()));
    for (std::size_t i = 0; i < space.dim(); ++i)
        table(static_cast<Eigen::Index>(keep_idx.at(split[i].first)), static_cast<Eigen::Index>(rest_idx.at(split[i].second))) =
            psi.amplitudes(static_cast<Eigen::Index>(i));
    out.rho = table * table.adjoint();
    return out;
}

double purity(const ReducedDensity& rho) {
    return (rho.rho * rho.rho).trace().real();
}

double log_negativity(const ReducedDensity& rho, const ModeSet& party_a) {
    std::vector<bool> in_a(rho.modes.size(), false);
    for (int m : party_a) {
        const auto it = std::find(rho.modes.begin(), rho.modes.end(), m);
        if (it == rho.modes.end()) throw DomainError("log_negativity: party mode not among the kept modes");
        in_a[static_cast<std::size_t>(it - rho.modes.begin())] = true;
    }
    std::map<std::vector<int>, Eigen::Index> index;
    for (std::size_t i = 0; i < rho.basis.size(); ++i) index.emplace(rho.basis[i], static_cast<Eigen::Index>(i));

    const auto dim = static_cast<Eigen::Index>(rho.basis.size());
    CMatrix pt = CMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            auto row = rho.basis[static_cast<std::size_t>(i)];
            auto col = rho.basis[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < in_a.size(); ++k)
                if (in_a[k]) std::swap(row[k], col[k]);
            const auto ri = index.find(row);
            const auto ci = index.find(col);
            if (ri == index.end() || ci == index.end())
                throw DomainError("log_negativity: reduced basis is not closed under partial transpose");
            pt(ri->second, ci->second) = rho.rho(i, j);
        }
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(pt, Eigen::EigenvaluesOnly);
    return std::log2(es.eigenvalues().cwiseAbs().sum());
}

double pure_state_log_negativity(const ReducedDensity& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.rho, Eigen::EigenvaluesOnly);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) sum += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    return 2.0 * std::log2(sum);
}

Moments moments(const FockState& psi, const FockSpace& space, const ModeSet& modes_in) {
    const ModeSet modes = checked_modes(modes_in, space.n_modes(), "moments");
    std::vector<Operator> quad;
    for (int k : modes) quad.push_back(Operator::position(k));
    for (int k : modes) quad.push_back(Operator::momentum(k));
    const auto d = static_cast<Eigen::Index>(quad.size());
    const CVector& v = psi.amplitudes;

    Moments out{Vector(d), Matrix(d, d)};
    for (Eigen::Index i = 0; i < d; ++i) out.mean(i) = expectation(quad[static_cast<std::size_t>(i)], space, v).real();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            const auto& a = quad[static_cast<std::size_t>(i)];
            const auto& b = quad[static_cast<std::size_t>(j)];
            const Complex sym = 0.5 * (expectation(a * b, space, v) + expectation(b * a, space, v));
            out.cov(i, j) = out.cov(j, i) = sym.real() - out.mean(i) * out.mean(j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

FockState gaussian_to_fock(const gaussian::GaussianState& state, const FockSpace& space) {
    if (state.n_modes() != space.n_modes()) throw DimensionError("gaussian_to_fock: mode count mismatch");
    const auto wf = gaussian::position_wavefunction(state);
    const int n = state.n_modes();
    const Complex i{0.0, 1.0};

    // Bargmann representation F(z) = C exp(z^T A z / 2 + b^T z) of the
    // wavefunction against the unit-oscillator kernel.
    const CMatrix id = CMatrix::Identity(n, n);
    const CMatrix w = (id + wf.z).inverse();
    const CMatrix a = w * (id - wf.z);
    const CVector shift = wf.z * wf.q.cast<Complex>() + i * wf.p.cast<Complex>();
    const CVector b = std::numbers::sqrt2 * (w * shift);

    Eigen::ComplexEigenSolver<CMatrix> es(id + wf.z, false);
    Complex inv_sqrt_det{1.0, 0.0};
    for (Eigen::Index k = 0; k < n; ++k) inv_sqrt_det /= std::sqrt(es.eigenvalues()(k));
    const double log_norm = 0.25 * (std::log(wf.z.real().determinant()) - n * std::log(std::numbers::pi));
    const CVector q = wf.q.cast<Complex>();
    const Complex expo = 0.5 * (shift.transpose() * w * shift)(0, 0) - 0.5 * (q.transpose() * wf.z * q)(0, 0) -
                         i * wf.p.dot(wf.q) / 2.0;
    const Complex c0 = std::exp(log_norm - 0.25 * n * std::log(std::numbers::pi) +
                                0.5 * n * std::log(2.0 * std::numbers::pi)) *
                       inv_sqrt_det * std::exp(expo);

    // G_{m+e_k} sqrt(m_k+1) = b_k G_m + sum_l A_kl sqrt(m_l) G_{m-e_l}
    CVector amp = CVector::Zero(static_cast<Eigen::Index>(space.dim()));
    std::vector<int> m;
    for (std::size_t idx : space.by_total()) {
        const auto occ = space.occupation(idx);
        int k = -1;
        for (int j = 0; j < n; ++j)
            if (occ[static_cast<std::size_t>(j)] > 0) {
                k = j;
                break;
            }
        if (k < 0) {
            amp(static_cast<Eigen::Index>(idx)) = c0;
            continue;
        }
        m.assign(occ.begin(), occ.end());
        --m[static_cast<std::size_t>(k)];
        Complex acc = b(k) * amp(static_cast<Eigen::Index>(*space.index_of(m)));
        for (int l = 0; l < n; ++l) {
            const int ml = m[static_cast<std::size_t>(l)];
            if (ml == 0) continue;
            --m[static_cast<std::size_t>(l)];
            acc += a(k, l) * std::sqrt(static_cast<double>(ml)) * amp(static_cast<Eigen::Index>(*space.index_of(m)));
            ++m[static_cast<std::size_t>(l)];
        }
        amp(static_cast<Eigen::Index>(idx)) = acc / std::sqrt(static_cast<double>(m[static_cast<std::size_t>(k)] + 1));
    }
    const double norm = amp.norm();
    if (norm * norm < 1.0 - 1e-8)
        throw ConditioningError("gaussian_to_fock: truncated norm deficit " + std::to_string(1.0 - norm * norm) +
                                " exceeds 1e-8; raise the cutoff");
    return FockState{std::move(amp)};
}

Projected project(const FockState& psi, const FockSpace& space, const ModeSet& measured_in,
                  const std::function<Complex(std::span<const int>)>& ket_amplitude) {
    if (static_cast<std::size_t>(psi.amplitudes.size()) != space.dim()) throw DimensionError("project: size mismatch");
    const ModeSet measured = checked_modes(measured_in, space.n_modes(), "project");
    const ModeSet rest = complement(measured, space.n_modes());
    if (rest.empty()) throw DomainError("project: nothing left after projection");

    std::map<std::vector<int>, Eigen::Index> env_idx;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> split(space.dim());
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto occ = space.occupation(i);
        for (int k : measured) split[i].first.push_back(occ[static_cast<std::size_t>(k)]);
        for (int k : rest) split[i].second.push_back(occ[static_cast<std::size_t>(k)]);
        env_idx.emplace(split[i].second, 0);
    }
    Projected out;
    Eigen::Index counter = 0;
    for (auto& [occ, idx] : env_idx) {
        idx = counter++;
        out.env_basis.push_back(occ);
    }
    out.amplitudes = CVector::Zero(counter);
    for (std::size_t i = 0; i < space.dim(); ++i)
        out.amplitudes(env_idx.at(split[i].second)) +=
            std::conj(ket_amplitude(split[i].first)) * psi.amplitudes(static_cast<Eigen::Index>(i));
    return out;
}

} // namespace qbm::fock
