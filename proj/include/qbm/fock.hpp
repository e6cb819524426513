// Brute-force oracle in a truncated number basis.
//
// Every mode uses the unit-mass, unit-frequency ladder operators
//   x = (a + a^dag)/sqrt2,  p = i(a^dag - a)/sqrt2,
// so the Fock vacuum is the Gaussian state with sigma = I/2. Operators are
// applied exactly to basis states and then projected onto the truncated space,
// so the dense matrices are P A P for the true operator A.

#pragma once

#include "qbm/gaussian.hpp"
#include "qbm/linalg.hpp"
#include "qbm/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qbm::fock {

inline constexpr std::size_t kDefaultDimensionCap = 20000;

class FockSpace {
public:
    // Product truncation: mode k keeps levels 0..cutoffs[k]-1, dim = prod cutoffs.
    static FockSpace per_mode(std::vector<int> cutoffs, std::size_t cap = kDefaultDimensionCap);

    // Total-excitation truncation: sum_k n_k <= max_total.
    static FockSpace total(int n_modes, int max_total, std::size_t cap = kDefaultDimensionCap);

    int n_modes() const { return n_modes_; }
    std::size_t dim() const { return dim_; }
    bool is_product() const { return max_total_ < 0; }
    const std::vector<int>& cutoffs() const { return cutoffs_; }
    int max_total() const { return max_total_; }

    std::span<const int> occupation(std::size_t index) const {
        return {occ_.data() + index * static_cast<std::size_t>(n_modes_), static_cast<std::size_t>(n_modes_)};
    }
    std::optional<std::size_t> index_of(std::span<const int> occ) const;

    // Basis indices ordered by total excitation (stable within a shell).
    const std::vector<std::size_t>& by_total() const { return by_total_; }

private:
    FockSpace() = default;
    void finish();

    int n_modes_{0};
    std::size_t dim_{0};
    std::vector<int> cutoffs_;
    int max_total_{-1};
    std::vector<int> occ_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> by_total_;
};

struct FockState {
    CVector amplitudes;
    double norm() const { return amplitudes.norm(); }
};

// ---------------------------------------------------------------------------
// Polynomials in ladder operators.

struct Ladder {
    int mode;
    bool dagger;
};

struct Monomial {
    Complex coeff;
    std::vector<Ladder> ops;  // operator product as written, rightmost acts first
};

class Operator {
public:
    Operator() = default;
    explicit Operator(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

    static Operator identity();
    static Operator annihilate(int mode);
    static Operator create(int mode);
    static Operator position(int mode);
    static Operator momentum(int mode);

    const std::vector<Monomial>& terms() const { return terms_; }

    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator*(Complex c, const Operator& a);

private:
    std::vector<Monomial> terms_;
};

// P A |psi>
CVector apply(const Operator& op, const FockSpace& space, const CVector& psi);
Complex expectation(const Operator& op, const FockSpace& space, const CVector& psi);

// Dense P A P. Throws DomainError if A is not real in the number basis.
Matrix dense_real(const Operator& op, const FockSpace& space);

// ---------------------------------------------------------------------------

// Term-by-term QBM Hamiltonian in the truncated basis. Throws DomainError when
// the space has a different mode count.
Matrix build_fock_hamiltonian(const model::ModelParams& params, const FockSpace& space);

// exp(-i H t) through one full eigen-decomposition of H (LAPACK dsyevd).
class SpectralEvolver {
public:
    explicit SpectralEvolver(const Matrix& h);

    std::size_t dim() const { return static_cast<std::size_t>(energies_.size()); }
    const Vector& energies() const { return energies_; }
    const Matrix& eigenvectors() const { return vectors_; }

    FockState evolve(const FockState& psi, double t) const;

private:
    Vector energies_;
    Matrix vectors_;
};

FockState evolve_dense(const FockState& psi, const Matrix& h, double t);

// ---------------------------------------------------------------------------

struct ReducedDensity {
    CMatrix rho;
    ModeSet modes;                          // kept modes, ascending
    std::vector<std::vector<int>> basis;    // occupations of the kept modes per row
};

ReducedDensity reduced_density(const FockState& psi, const FockSpace& space, const ModeSet& keep);

double purity(const ReducedDensity& rho);

// log2 of the trace norm of the partial transpose over the kept modes listed
// in `party_a`. The reduced basis must be closed under the transpose (product
// truncation).
double log_negativity(const ReducedDensity& rho, const ModeSet& party_a);

// For a reduced density of a pure global state: E_N = 2 log2 sum_i sqrt(l_i)
// over the Schmidt weights l_i, across kept | discarded.
double pure_state_log_negativity(const ReducedDensity& rho);

// Mean and covariance of (x_k..., p_k...) over `modes`, from exact operator
// moments.
struct Moments {
    Vector mean;
    Matrix cov;
};
Moments moments(const FockState& psi, const FockSpace& space, const ModeSet& modes);

// ---------------------------------------------------------------------------

// Number-basis amplitudes of a pure Gaussian state (Weyl phase convention of
// gaussian::position_wavefunction). Throws ConditioningError when the
// truncated norm is below 1 - 1e-8 and DomainError for mixed input.
FockState gaussian_to_fock(const gaussian::GaussianState& state, const FockSpace& space);

// (<phi|_measured (x) I) |psi>, where <phi| has amplitudes bra(n_measured).
struct Projected {
    CVector amplitudes;
    std::vector<std::vector<int>> env_basis;  // occupations of the unmeasured modes
};
Projected project(const FockState& psi, const FockSpace& space, const ModeSet& measured,
                  const std::function<Complex(std::span<const int>)>& ket_amplitude);

} // namespace qbm::fock
