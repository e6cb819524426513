#include "qbm/structure.hpp"

#include "qbm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace qbm::structure {

namespace {

std::vector<std::string> default_labels(int n, const std::string& prefix) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void check_labels(const std::vector<std::string>& labels, Eigen::Index n) {
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw DimensionError("StructureMap: label count does not match T");
}

} // namespace

StructureMap::StructureMap(Matrix t, std::vector<std::string> labels)
    : t_(std::move(t)), labels_(std::move(labels)) {
    if (t_.rows() != t_.cols() || t_.rows() == 0) throw DimensionError("StructureMap: T must be square");
    check_labels(labels_, t_.rows());
    Eigen::FullPivLU<Matrix> lu(t_);
    const double det = lu.determinant();
    if (!(std::abs(det) > kMinAbsDeterminant)) {
        std::ostringstream os;
        os << "StructureMap: T is not invertible (|det T| = " << std::abs(det) << ")";
        throw DomainError(os.str());
    }
    t_inv_ = lu.inverse();
}

StructureMap::StructureMap(Matrix t, Matrix t_inverse, std::vector<std::string> labels)
    : t_(std::move(t)), t_inv_(std::move(t_inverse)), labels_(std::move(labels)) {
    if (t_.rows() != t_.cols() || t_.rows() == 0 || t_inv_.rows() != t_.rows() ||
        t_inv_.cols() != t_.cols())
        throw DimensionError("StructureMap: T and T^-1 must be square of equal size");
    check_labels(labels_, t_.rows());
    const Eigen::Index n = t_.rows();
    const double scale = std::max(1.0, max_abs(t_) * max_abs(t_inv_));
    if (max_abs(t_ * t_inv_ - Matrix::Identity(n, n)) > 1e-9 * scale)
        throw DomainError("StructureMap: supplied inverse does not invert T");
    if (!(std::abs(t_.determinant()) > kMinAbsDeterminant))
        throw DomainError("StructureMap: T is not invertible");
}

StructureMap StructureMap::identity(int n_modes) {
    return StructureMap(Matrix::Identity(n_modes, n_modes), Matrix::Identity(n_modes, n_modes),
                        default_labels(n_modes, "q"));
}

Matrix StructureMap::lift() const {
    const Eigen::Index n = t_.rows();
    Matrix s = Matrix::Zero(2 * n, 2 * n);
    s.topLeftCorner(n, n) = t_;
    s.bottomRightCorner(n, n) = t_inv_.transpose();
    return s;
}

Matrix StructureMap::lift_inverse() const {
    const Eigen::Index n = t_.rows();
    Matrix s = Matrix::Zero(2 * n, 2 * n);
    s.topLeftCorner(n, n) = t_inv_;
    s.bottomRightCorner(n, n) = t_.transpose();
    return s;
}

StructureMap StructureMap::inverse() const {
    return StructureMap(t_inv_, t_, labels_);
}

StructureMap StructureMap::with_labels(std::vector<std::string> labels) const {
    return StructureMap(t_, t_inv_, std::move(labels));
}

StructureMap StructureMap::extended(int extra_modes, const std::string& label_prefix) const {
    if (extra_modes < 0) throw DomainError("StructureMap::extended: negative mode count");
    const Eigen::Index n = t_.rows();
    const Eigen::Index m = n + extra_modes;
    Matrix t = Matrix::Identity(m, m);
    Matrix ti = Matrix::Identity(m, m);
    t.topLeftCorner(n, n) = t_;
    ti.topLeftCorner(n, n) = t_inv_;
    auto labels = labels_;
    for (int i = 0; i < extra_modes; ++i) labels.push_back(label_prefix + std::to_string(i + 1));
    return StructureMap(std::move(t), std::move(ti), std::move(labels));
}

// ---------------------------------------------------------------------------

StructureMap cm_relative_map(std::span<const double> masses, RelativeScheme scheme) {
    const auto n = static_cast<Eigen::Index>(masses.size());
    if (n < 1) throw DomainError("cm_relative_map: need at least one mass");
    for (double m : masses)
        if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("cm_relative_map: masses must be positive");

    const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
    Matrix t = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) t(0, j) = masses[static_cast<std::size_t>(j)] / total;

    std::vector<std::string> labels{"CM"};
    if (scheme == RelativeScheme::ReferenceParticle) {
        for (Eigen::Index a = 1; a < n; ++a) {
            t(a, 0) = 1.0;
            t(a, a) = -1.0;
            labels.push_back("R" + std::to_string(a));
        }
    } else {
        double cluster = 0.0;
        for (Eigen::Index k = 1; k < n; ++k) {
            cluster += masses[static_cast<std::size_t>(k - 1)];
            for (Eigen::Index j = 0; j < k; ++j) t(k, j) = masses[static_cast<std::size_t>(j)] / cluster;
            t(k, k) = -1.0;
            labels.push_back("R" + std::to_string(k));
        }
    }
    return StructureMap(std::move(t), std::move(labels));
}

model::QuadraticHamiltonian transform_hamiltonian(const model::QuadraticHamiltonian& h,
                                                  const StructureMap& map) {
    if (h.n_modes() != map.n_modes())
        throw DimensionError("transform_hamiltonian: Hamiltonian has " + std::to_string(h.n_modes()) +
                             " modes, map has " + std::to_string(map.n_modes()));
    const Matrix s_inv = map.lift_inverse();
    Matrix k = s_inv.transpose() * h.k() * s_inv;
    k = 0.5 * (k + k.transpose()).eval();
    return model::QuadraticHamiltonian(std::move(k));
}

StructureMap normal_mode_map(const model::QuadraticHamiltonian& h, const ModeSet& block_in) {
    const int n = h.n_modes();
    const ModeSet block = checked_modes(block_in, n, "normal_mode_map");
    const auto b = static_cast<Eigen::Index>(block.size());

    std::vector<Eigen::Index> xi(block.begin(), block.end());
    std::vector<Eigen::Index> pi;
    for (int k : block) pi.push_back(n + k);

    const Matrix potential = select(h.k(), xi, xi);
    const Matrix kinetic = select(h.k(), pi, pi);
    const Matrix cross = select(h.k(), xi, pi);
    const double scale = std::max(max_abs(potential), max_abs(kinetic));
    if (max_abs(cross) > 1e-12 * std::max(scale, 1.0))
        throw DomainError("normal_mode_map: block has position-momentum cross terms");

    Eigen::SelfAdjointEigenSolver<Matrix> kin(kinetic);
    if (kin.info() != Eigen::Success) throw ConditioningError("normal_mode_map: kinetic eigensolver failed");
    const Vector kin_vals = kin.eigenvalues();
    if (!(kin_vals(0) > 0.0)) throw DomainError("normal_mode_map: kinetic block is not positive definite");
    const Matrix kin_sqrt = kin.eigenvectors() * kin_vals.cwiseSqrt().asDiagonal() * kin.eigenvectors().transpose();
    const Matrix kin_isqrt =
        kin.eigenvectors() * kin_vals.cwiseSqrt().cwiseInverse().asDiagonal() * kin.eigenvectors().transpose();

    // mass-weighted potential: B^1/2 A B^1/2
    Matrix weighted = kin_sqrt * potential * kin_sqrt;
    weighted = 0.5 * (weighted + weighted.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(weighted);
    if (es.info() != Eigen::Success) throw ConditioningError("normal_mode_map: eigensolver failed");

    struct Mode {
        double lambda;
        Vector vec;
    };
    std::vector<Mode> modes;
    for (Eigen::Index c = 0; c < b; ++c) {
        Vector v = es.eigenvectors().col(c);
        for (Eigen::Index r = 0; r < b; ++r) {
            if (std::abs(v(r)) > 1e-12) {
                if (v(r) < 0.0) v = -v;
                break;
            }
        }
        modes.push_back({es.eigenvalues()(c), std::move(v)});
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& l, const Mode& r) {
        if (l.lambda != r.lambda) return l.lambda < r.lambda;
        return std::lexicographical_compare(l.vec.begin(), l.vec.end(), r.vec.begin(), r.vec.end());
    });

    Matrix u(b, b);
    for (Eigen::Index c = 0; c < b; ++c) u.col(c) = modes[static_cast<std::size_t>(c)].vec;

    // x_block' = U^T B^-1/2 x_block, inverse B^1/2 U
    const Matrix tb = u.transpose() * kin_isqrt;
    const Matrix tb_inv = kin_sqrt * u;

    Matrix t = Matrix::Identity(n, n);
    Matrix t_inv = Matrix::Identity(n, n);
    for (Eigen::Index r = 0; r < b; ++r) {
        for (Eigen::Index c = 0; c < b; ++c) {
            t(xi[static_cast<std::size_t>(r)], xi[static_cast<std::size_t>(c)]) = tb(r, c);
            t_inv(xi[static_cast<std::size_t>(r)], xi[static_cast<std::size_t>(c)]) = tb_inv(r, c);
        }
    }
    std::vector<std::string> labels = default_labels(n, "q");
    for (Eigen::Index r = 0; r < b; ++r) labels[static_cast<std::size_t>(xi[static_cast<std::size_t>(r)])] = "NM" + std::to_string(r + 1);
    return StructureMap(std::move(t), std::move(t_inv), std::move(labels));
}

StructureMap compose(const StructureMap& first, const StructureMap& second) {
    if (first.n_modes() != second.n_modes())
        throw DimensionError("compose: maps act on different mode counts");
    return StructureMap(second.t() * first.t(), first.t_inverse() * second.t_inverse(), second.labels());
}

// ---------------------------------------------------------------------------

namespace {

void check_partition(const std::vector<ModeSet>& split, int n, const char* what) {
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto& part : split) {
        if (part.empty()) throw DomainError(std::string(what) + ": empty subsystem");
        for (int k : part) {
            if (k < 0 || k >= n) throw DomainError(std::string(what) + ": mode index out of range");
            if (seen[static_cast<std::size_t>(k)]++) throw DomainError(std::string(what) + ": mode listed twice");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw DomainError(std::string(what) + ": subsystems do not cover all modes");
}

std::vector<double> row_density(const Matrix& m) {
    std::vector<double> out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto nonzero = (m.row(r).array().abs() > kIrreducibilityTolerance).count();
        out.push_back(static_cast<double>(nonzero) / static_cast<double>(m.cols()));
    }
    return out;
}

} // namespace

IrreducibilityReport irreducibility_report(const StructureMap& map,
                                           const std::vector<ModeSet>& split_old,
                                           const std::vector<ModeSet>& split_new) {
    const int n = map.n_modes();
    check_partition(split_old, n, "irreducibility_report(split_old)");
    check_partition(split_new, n, "irreducibility_report(split_new)");

    IrreducibilityReport rep;
    rep.forward_row_density = row_density(map.t());
    rep.inverse_row_density = row_density(map.t_inverse());

    double min_abs = std::numeric_limits<double>::infinity();
    for (int r : split_new.front()) min_abs = std::min(min_abs, map.t().row(r).cwiseAbs().minCoeff());
    for (int r : split_old.front()) min_abs = std::min(min_abs, map.t_inverse().row(r).cwiseAbs().minCoeff());
    rep.min_abs_coefficient = min_abs;

    const auto dense = [](const std::vector<double>& d) {
        return std::all_of(d.begin(), d.end(), [](double x) { return x == 1.0; });
    };
    rep.is_irreducible = dense(rep.forward_row_density) && dense(rep.inverse_row_density);
    return rep;
}

// ---------------------------------------------------------------------------

AlternateStructure alternate_structure(const model::QuadraticHamiltonian& h,
                                       std::span<const double> masses, RelativeScheme scheme) {
    if (static_cast<int>(masses.size()) != h.n_modes())
        throw DimensionError("alternate_structure: mass count does not match Hamiltonian");
    const int n = h.n_modes();
    const StructureMap cm = cm_relative_map(masses, scheme);
    StructureMap full = cm;
    if (n > 1) {
        const auto h_cm = transform_hamiltonian(h, cm);
        ModeSet relative;
        for (int k = 1; k < n; ++k) relative.push_back(k);
        full = compose(cm, normal_mode_map(h_cm, relative));
    }
    std::vector<std::string> labels{"S'"};
    for (int k = 1; k < n; ++k) labels.push_back("E'" + std::to_string(k));
    full = full.with_labels(std::move(labels));
    auto h_new = transform_hamiltonian(h, full);
    return AlternateStructure{std::move(full), std::move(h_new)};
}

// ---------------------------------------------------------------------------

void write_structure_map(std::ostream& out, const StructureMap& map) {
    const int n = map.n_modes();
    out << "# qbm-structures v1 structure-map\n";
    out << "modes " << n << "\n";
    out << "labels";
    for (const auto& l : map.labels()) {
        if (l.empty() || l.find_first_of(" \t\r\n") != std::string::npos)
            throw DomainError("write_structure_map: label '" + l + "' is empty or contains whitespace");
        out << ' ' << l;
    }
    out << "\n";
    char buf[32];
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", map.t()(r, c));
            out << (c ? " " : "") << buf;
        }
        out << "\n";
    }
}

StructureMap read_structure_map(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# qbm-structures v1 structure-map", 0) != 0)
        throw DomainError("read_structure_map: missing '# qbm-structures v1 structure-map' header");

    std::string key;
    int n = 0;
    if (!(in >> key >> n) || key != "modes" || n < 1)
        throw DomainError("read_structure_map: expected 'modes <n>'");
    if (!(in >> key) || key != "labels") throw DomainError("read_structure_map: expected 'labels'");
    std::vector<std::string> labels(static_cast<std::size_t>(n));
    for (auto& l : labels)
        if (!(in >> l)) throw DomainError("read_structure_map: too few labels");
    Matrix t(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (!(in >> t(r, c)))
                throw DomainError("read_structure_map: matrix entry (" + std::to_string(r) + ", " +
                                  std::to_string(c) + ") missing or malformed");
    return StructureMap(std::move(t), std::move(labels));
}

} // namespace qbm::structure
