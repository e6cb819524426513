#include "qbm/linalg.hpp"

#include "qbm/errors.hpp"

#include <algorithm>
#include <string>

namespace qbm {

Matrix symplectic_form(int n_modes) {
    Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
    omega.topRightCorner(n_modes, n_modes).setIdentity();
    omega.bottomLeftCorner(n_modes, n_modes) = -Matrix::Identity(n_modes, n_modes);
    return omega;
}

double symplectic_defect(const Matrix& s) {
    if (s.rows() != s.cols() || s.rows() % 2 != 0) {
        throw DimensionError("symplectic_defect: matrix must be square with even size");
    }
    const Matrix omega = symplectic_form(static_cast<int>(s.rows() / 2));
    return max_abs(s * omega * s.transpose() - omega);
}

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::vector<Eigen::Index> quadrature_indices(const ModeSet& modes, int n_modes) {
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * modes.size());
    for (int k : modes) idx.push_back(k);
    for (int k : modes) idx.push_back(n_modes + k);
    return idx;
}

Matrix select(const Matrix& m, const std::vector<Eigen::Index>& rows,
              const std::vector<Eigen::Index>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    return out;
}

Vector select(const Vector& v, const std::vector<Eigen::Index>& rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

Matrix phase_space_direct_sum(const Matrix& a, const Matrix& b) {
    const Eigen::Index na = a.rows() / 2;
    const Eigen::Index nb = b.rows() / 2;
    const Eigen::Index n = na + nb;
    Matrix out = Matrix::Zero(2 * n, 2 * n);
    // a occupies modes [0, na), b occupies modes [na, n)
    for (int blk_r = 0; blk_r < 2; ++blk_r) {
        for (int blk_c = 0; blk_c < 2; ++blk_c) {
            out.block(blk_r * n, blk_c * n, na, na) = a.block(blk_r * na, blk_c * na, na, na);
            out.block(blk_r * n + na, blk_c * n + na, nb, nb) =
                b.block(blk_r * nb, blk_c * nb, nb, nb);
        }
    }
    return out;
}

Vector phase_space_concat(const Vector& a, const Vector& b) {
    const Eigen::Index na = a.size() / 2;
    const Eigen::Index nb = b.size() / 2;
    Vector out(a.size() + b.size());
    out << a.head(na), b.head(nb), a.tail(na), b.tail(nb);
    return out;
}

ModeSet complement(const ModeSet& modes, int n_modes) {
    ModeSet out;
    for (int k = 0; k < n_modes; ++k)
        if (std::find(modes.begin(), modes.end(), k) == modes.end()) out.push_back(k);
    return out;
}

ModeSet checked_modes(ModeSet modes, int n_modes, const char* what) {
    if (modes.empty()) throw DomainError(std::string(what) + ": mode set is empty");
    std::sort(modes.begin(), modes.end());
    if (std::adjacent_find(modes.begin(), modes.end()) != modes.end())
        throw DomainError(std::string(what) + ": duplicate mode index");
    if (modes.front() < 0 || modes.back() >= n_modes)
        throw DomainError(std::string(what) + ": mode index out of range [0, " +
                          std::to_string(n_modes) + ")");
    return modes;
}

ModeSet all_modes(int n_modes) {
    ModeSet out(static_cast<std::size_t>(n_modes));
    for (int k = 0; k < n_modes; ++k) out[static_cast<std::size_t>(k)] = k;
    return out;
}

} // namespace qbm
