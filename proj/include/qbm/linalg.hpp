// Phase-space conventions and small Eigen helpers
//
// Phase-space vectors are ordered z = (x_1..x_n, p_1..p_n). The symplectic
// form is Omega = [[0, I], [-I, 0]], so [z_i, z_j] = i Omega_ij with hbar = 1.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qbm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Ordered set of mode indices (0-based). Kept sorted and unique by the helpers
// that produce them.
using ModeSet = std::vector<int>;

Matrix symplectic_form(int n_modes);

// max |S Omega S^T - Omega|
double symplectic_defect(const Matrix& s);

double max_abs(const Matrix& m);

// Phase-space row indices for the given modes: all positions, then all momenta.
std::vector<Eigen::Index> quadrature_indices(const ModeSet& modes, int n_modes);

Matrix select(const Matrix& m, const std::vector<Eigen::Index>& rows,
              const std::vector<Eigen::Index>& cols);
Vector select(const Vector& v, const std::vector<Eigen::Index>& rows);

// Direct sum of two phase-space matrices (2a x 2a and 2b x 2b) in the
// (x..., p...) ordering: modes of `a` come first.
Matrix phase_space_direct_sum(const Matrix& a, const Matrix& b);
Vector phase_space_concat(const Vector& a, const Vector& b);

// Complement of `modes` in {0..n_modes-1}.
ModeSet complement(const ModeSet& modes, int n_modes);

// Throws DomainError unless `modes` is nonempty, sorted-unique after
// normalization, and within range. Returns the normalized set.
ModeSet checked_modes(ModeSet modes, int n_modes, const char* what);

ModeSet all_modes(int n_modes);

} // namespace qbm
