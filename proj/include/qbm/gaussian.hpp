// Exact Gaussian-state machinery.
//
// A Gaussian state is its mean <z> and covariance sigma_ij = 1/2 <{dz_i, dz_j}>
// over z = (x_1..x_n, p_1..p_n), hbar = 1, so the unit-mass unit-frequency
// vacuum has sigma = I/2. Dynamics under a quadratic Hamiltonian is the
// symplectic map S(t) = exp(Omega K t): mean -> S mean, sigma -> S sigma S^T.

#pragma once

#include "qbm/linalg.hpp"
#include "qbm/model.hpp"

#include <span>
#include <vector>

namespace qbm::gaussian {

class GaussianState {
public:
    // Validates shapes, symmetry, and the uncertainty relation
    // sigma + (i/2) Omega >= 0 (eigenvalues >= -1e-10 * max(1, |sigma|)).
    GaussianState(Vector mean, Matrix cov);

    int n_modes() const { return static_cast<int>(mean_.size() / 2); }
    const Vector& mean() const { return mean_; }
    const Matrix& cov() const { return cov_; }

    // Positive symplectic eigenvalues, ascending.
    Vector symplectic_eigenvalues() const;
    bool is_pure(double tol = 1e-8) const;

private:
    Vector mean_;
    Matrix cov_;
};

// Mass and frequency setting the width of a coherent or thermal mode.
struct ModeWidth {
    double mass{1.0};
    double omega{1.0};
};

// Coherent state of `mode` centered at (x, p) with sigma_xx = 1/(2 m w),
// sigma_pp = m w / 2; every other mode is in the unit vacuum sigma = I/2.
GaussianState coherent_state(int n_modes, int mode, double x, double p, ModeWidth width = {});

// Product of per-mode thermal states at temperature T (k_B = 1):
// sigma_xx = coth(w/2T)/(2 m w), sigma_pp = m w coth(w/2T)/2. T = 0 gives the
// ground state of each mode.
GaussianState thermal_state(std::span<const ModeWidth> modes, double temperature);

// Tensor product; modes of `a` first.
GaussianState product(const GaussianState& a, const GaussianState& b);

GaussianState displaced(const GaussianState& s, const Vector& shift);

// ---------------------------------------------------------------------------

// sigma = S diag(nu, nu) S^T with S symplectic, nu ascending.
struct WilliamsonDecomposition {
    Vector nu;
    Matrix s;
};
WilliamsonDecomposition williamson(const Matrix& cov);

// Positive symplectic eigenvalues of a positive definite 2n x 2n matrix.
Vector symplectic_eigenvalues(const Matrix& cov);

// Pure state on 2n modes (ancillas n..2n-1) whose reduction to modes 0..n-1
// is `state`: a two-mode squeezed purification of each Williamson mode.
GaussianState purify(const GaussianState& state);

// ---------------------------------------------------------------------------

// exp(Omega K t) by scaling-and-squaring with a Pade approximant.
Matrix propagator(const model::QuadraticHamiltonian& h, double t);

// exp(Omega K t) through the eigen-decomposition of Omega K. Throws
// ConditioningError when Omega K is numerically defective (eigenvector
// condition number above 1e8).
Matrix propagator_spectral(const model::QuadraticHamiltonian& h, double t);

// Extend a symplectic map on n modes by the identity on `extra_modes` appended
// modes.
Matrix extend_symplectic(const Matrix& s, int extra_modes);

GaussianState evolve(const GaussianState& state, const Matrix& s);

// ---------------------------------------------------------------------------

// Partial trace: keep the listed modes (in ascending order).
GaussianState reduce(const GaussianState& state, const ModeSet& keep);

// 1 / (2^n sqrt(det sigma)). Throws ConditioningError when det sigma < 1e-300
// or sigma is not positive definite.
double purity(const GaussianState& state);

// Logarithmic negativity (base 2) across party_a | rest.
double log_negativity(const GaussianState& state, const ModeSet& party_a);

// ---------------------------------------------------------------------------
// Pure-state wavefunctions and overlaps.
//
// A pure Gaussian state is represented in position space as
//   psi(x) = N exp(-1/2 (x-q)^T Z (x-q) + i p^T (x - q/2)),
//   N = (det Re Z / pi^n)^(1/4),
// i.e. the Weyl-displaced (D(q,p)) centered state. This fixes the phase of
// overlaps; coherent states match D(alpha)|0> exactly.

struct PositionWavefunction {
    CMatrix z;
    Vector q;
    Vector p;
};

// Throws DomainError for mixed input.
PositionWavefunction position_wavefunction(const GaussianState& state);

// <a|b>. Throws DomainError for mixed input or size mismatch.
Complex overlap(const GaussianState& a, const GaussianState& b);

// |<a|b>| from covariances and means alone:
// |<a|b>|^2 = det(sigma_a + sigma_b)^(-1/2) exp(-1/2 d^T (sigma_a + sigma_b)^-1 d).
double overlap_magnitude(const GaussianState& a, const GaussianState& b);

// State of the complementary modes after projecting `measured` onto the
// coherent state centered at `outcome` (length 2|measured|, positions then
// momenta) with the given widths.
GaussianState condition_on_coherent(const GaussianState& state, const ModeSet& measured,
                                    const Vector& outcome, ModeWidth probe = {});

// ---------------------------------------------------------------------------

struct Branch {
    Complex amplitude;
    Vector mean;
};

// Superposition sum_k c_k |G_k> of pure Gaussian branches sharing one
// covariance. Amplitudes are rescaled on construction so the state has unit
// norm, including the cross terms from branch overlaps.
class CatState {
public:
    CatState(std::vector<Branch> branches, Matrix cov);

    const std::vector<Branch>& branches() const { return branches_; }
    const Matrix& cov() const { return cov_; }
    int n_modes() const { return static_cast<int>(cov_.rows() / 2); }

    GaussianState branch_state(std::size_t k) const;

    // sqrt(sum_jk conj(c_j) c_k <G_j|G_k>)
    double norm() const;

private:
    friend CatState evolve(const CatState& cat, const Matrix& s);
    CatState(std::vector<Branch> branches, Matrix cov, bool);
    std::vector<Branch> branches_;
    Matrix cov_;
};

CatState evolve(const CatState& cat, const Matrix& s);

// |<e_1|e_2>|, where e_k is the environment state correlated with branch k:
// the branch projected onto the system coherent state centered at that
// branch's own system mean. Requires exactly two branches and a pure shared
// covariance.
double decoherence_factor(const CatState& cat, const ModeSet& env, ModeWidth probe = {});

} // namespace qbm::gaussian
