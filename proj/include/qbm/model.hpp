// Quantum Brownian motion model universe: a particle bilinearly
// position-coupled to a bath of harmonic oscillators.
//
//   H = p_1^2/2m_1 + V(x_1) + sum_i (p_2i^2/2m_2i + m_2i w_i^2 x_2i^2/2)
//       +/- x_1 sum_i k_i x_2i
//
// Mode 0 is the particle, modes 1..N are the bath. Units: hbar = 1.

#pragma once

#include "qbm/linalg.hpp"

#include <variant>
#include <vector>

namespace qbm::model {

enum class CouplingSign { Plus, Minus };

inline double sign_value(CouplingSign s) { return s == CouplingSign::Plus ? 1.0 : -1.0; }

struct FreePotential {};
struct HarmonicPotential {
    double omega{1.0};
};
using Potential = std::variant<FreePotential, HarmonicPotential>;

struct BathMode {
    double mass{1.0};
    double omega{1.0};
    double coupling{0.0};  // kappa_i, the sign lives in ModelParams::coupling_sign
};

struct ModelParams {
    double m1{1.0};
    Potential potential{HarmonicPotential{}};
    std::vector<BathMode> bath;
    CouplingSign coupling_sign{CouplingSign::Plus};

    int n_modes() const { return static_cast<int>(bath.size()) + 1; }
    std::vector<double> masses() const;

    // Throws DomainError naming the offending field.
    void validate() const;
};

// H = 1/2 z^T K z over z = (x_1..x_n, p_1..p_n).
class QuadraticHamiltonian {
public:
    static constexpr double kSymmetryTolerance = 1e-12;

    // Throws DimensionError for odd/non-square K, DomainError if K is not
    // symmetric to kSymmetryTolerance. K is stored exactly symmetrized.
    explicit QuadraticHamiltonian(Matrix k);

    int n_modes() const { return n_; }
    const Matrix& k() const { return k_; }

    Matrix position_block() const { return k_.topLeftCorner(n_, n_); }
    Matrix momentum_block() const { return k_.bottomRightCorner(n_, n_); }
    Matrix cross_block() const { return k_.topRightCorner(n_, n_); }

    // Omega K: generator of the Heisenberg flow dz/dt = Omega K z.
    Matrix dynamical_matrix() const;

    // Classical value 1/2 z^T K z.
    double value(const Vector& z) const;

    // Quantum expectation 1/2 (tr(K sigma) + m^T K m) for a Gaussian state.
    double expectation(const Vector& mean, const Matrix& cov) const;

    // Smallest eigenvalue of the position-position block.
    double min_potential_eigenvalue() const;

private:
    int n_;
    Matrix k_;
};

QuadraticHamiltonian build_qbm_hamiltonian(const ModelParams& params);

// ---------------------------------------------------------------------------
// Bath discretization (Ohmic spectral density J(w) = m gamma w).

enum class GridScheme { Linear, Log };

struct BathSpec {
    int n_modes{1};
    double gamma{0.0};
    double cutoff{1.0};
    GridScheme scheme{GridScheme::Linear};

    void validate() const;
};

// Frequencies on the chosen grid in (0, cutoff] with local spacings dw_i and
// kappa_i^2 = (2/pi) m gamma w_i^2 dw_i.
//
// Linear: w_i = i * cutoff / N, dw_i = cutoff / N.
// Log:    w_i geometric from cutoff/N to cutoff, dw_i = w_i * ln(ratio); a
//         single mode sits at the cutoff with dw = cutoff.
std::vector<BathMode> discretize_bath(const BathSpec& spec, double mass = 1.0);

// ---------------------------------------------------------------------------
// Reading a Hamiltonian back in "Brownian" form: one system mode coupled only
// through its position to the positions of mutually uncoupled modes.

struct BrownianForm {
    int system_mode{0};
    double system_mass{0.0};       // 1 / K(p_s, p_s)
    double system_stiffness{0.0};  // K(x_s, x_s) = M Omega^2
    std::vector<int> env_modes;
    std::vector<double> env_mass;       // 1 / K(p_a, p_a)
    std::vector<double> env_stiffness;  // K(x_a, x_a) = mu nu^2
    std::vector<double> coupling;       // K(x_s, x_a), signed

    // Largest entry outside the allowed pattern, relative to the largest
    // diagonal entry of K.
    double system_leak{0.0};  // couplings of the system to anything but env positions
    double env_offdiag{0.0};  // couplings among env modes

    bool system_couples_only_to_env_positions(double tol = 1e-10) const {
        return system_leak < tol;
    }
    bool env_decoupled(double tol = 1e-10) const { return env_offdiag < tol; }
    bool system_potential_positive() const { return system_stiffness > 0.0; }
};

BrownianForm read_brownian_form(const QuadraticHamiltonian& h, int system_mode = 0);

// Inverse of build_qbm_hamiltonian for a Hamiltonian already in Brownian form.
// Throws DomainError when the form is violated or a bath stiffness is not
// positive.
ModelParams read_back_params(const QuadraticHamiltonian& h, CouplingSign sign);

} // namespace qbm::model
