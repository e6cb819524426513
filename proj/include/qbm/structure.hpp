// Linear canonical transformations between decompositions
// of the model universe into subsystems.
//
// A StructureMap acts on positions as x' = T x and on momenta as p' = T^-T p,
// which preserves [x_i, p_j] = i delta_ij. The phase-space lift is
// S = diag(T, T^-T) in the (x..., p...) ordering.

#pragma once

#include "qbm/linalg.hpp"
#include "qbm/model.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qbm::structure {

class StructureMap {
public:
    static constexpr double kMinAbsDeterminant = 1e-12;

    // Inverts T numerically. Throws DomainError when |det T| <= 1e-12.
    StructureMap(Matrix t, std::vector<std::string> labels);

    // Uses a known inverse (checked to 1e-9 relative).
    StructureMap(Matrix t, Matrix t_inverse, std::vector<std::string> labels);

    static StructureMap identity(int n_modes);

    int n_modes() const { return static_cast<int>(t_.rows()); }
    const Matrix& t() const { return t_; }
    const Matrix& t_inverse() const { return t_inv_; }
    const std::vector<std::string>& labels() const { return labels_; }

    Matrix lift() const;          // S
    Matrix lift_inverse() const;  // S^-1 = diag(T^-1, T^T)

    StructureMap inverse() const;
    StructureMap with_labels(std::vector<std::string> labels) const;

    // Identity on `extra_modes` appended after the existing ones (ancillas).
    StructureMap extended(int extra_modes, const std::string& label_prefix = "A") const;

private:
    Matrix t_;
    Matrix t_inv_;
    std::vector<std::string> labels_;
};

// Relative-coordinate basis used next to the center of mass.
//  ReferenceParticle: r_a = x_0 - x_a (a = 1..N). Kinetic energy acquires the
//                     momentum cross terms known as mass polarization.
//  Jacobi:            r_k = X_cm(0..k-1) - x_k. Kinetic energy stays diagonal.
enum class RelativeScheme { ReferenceParticle, Jacobi };

// Row 0 is the center of mass X = sum m_i x_i / M; rows 1..N are relative
// coordinates per `scheme`. Throws DomainError for non-positive masses.
StructureMap cm_relative_map(std::span<const double> masses,
                             RelativeScheme scheme = RelativeScheme::ReferenceParticle);

// K' = S^-T K S^-1: the same operator written in the new coordinates.
model::QuadraticHamiltonian transform_hamiltonian(const model::QuadraticHamiltonian& h,
                                                  const StructureMap& map);

// Normal-mode decoupling of the modes in `block`. Identity outside the block;
// inside it the new coordinates have unit mass and diagonal position and
// momentum blocks. Modes are sorted by ascending squared frequency; each
// eigenvector has its first nonzero entry positive, and exact frequency ties
// are ordered lexicographically by eigenvector entries.
//
// Throws DomainError if the block's kinetic sub-matrix is not positive
// definite or if it carries position-momentum cross terms.
StructureMap normal_mode_map(const model::QuadraticHamiltonian& h, const ModeSet& block);

// Apply `first`, then `second`: T = T_second T_first.
StructureMap compose(const StructureMap& first, const StructureMap& second);

// ---------------------------------------------------------------------------

struct IrreducibilityReport {
    std::vector<double> forward_row_density;  // nonzero fraction per row of T
    std::vector<double> inverse_row_density;  // nonzero fraction per row of T^-1
    // Smallest |entry| over the rows expressing the first new subsystem in old
    // coordinates (T) and the first old subsystem in new coordinates (T^-1).
    double min_abs_coefficient{0.0};
    bool is_irreducible{false};
};

inline constexpr double kIrreducibilityTolerance = 1e-12;

// is_irreducible holds iff every row of T and of T^-1 is fully dense, i.e.
// each coordinate of either structure is a combination of all coordinates of
// the other. The splits must each partition {0..n-1}.
IrreducibilityReport irreducibility_report(const StructureMap& map,
                                           const std::vector<ModeSet>& split_old,
                                           const std::vector<ModeSet>& split_new);

// ---------------------------------------------------------------------------

// Center of mass + relative coordinates, followed by normal-mode decoupling of
// the relative block. The result is labeled S', E'1..E'N and the transformed
// Hamiltonian is again one system mode position-coupled to uncoupled
// oscillators.
struct AlternateStructure {
    StructureMap map;
    model::QuadraticHamiltonian hamiltonian;
};

AlternateStructure alternate_structure(const model::QuadraticHamiltonian& h,
                                       std::span<const double> masses,
                                       RelativeScheme scheme = RelativeScheme::ReferenceParticle);

// ---------------------------------------------------------------------------
// Plain-text format:
//
//   # qbm-structures v1 structure-map
//   modes <n>
//   labels <label_0> ... <label_n-1>
//   <T row 0, n decimals with 17 significant digits>
//   ...
//
// Labels must not contain whitespace.
void write_structure_map(std::ostream& out, const StructureMap& map);
StructureMap read_structure_map(std::istream& in);

} // namespace qbm::structure
