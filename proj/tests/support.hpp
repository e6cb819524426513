// Shared test helpers: seeded generators for random instances and a few
// independent reference formulas.

#pragma once

#include "qbm/errors.hpp"
#include "qbm/experiments.hpp"
#include "qbm/gaussian.hpp"
#include "qbm/linalg.hpp"
#include "qbm/model.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace qbm::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
    bool coin() { return integer(0, 1) == 1; }

    Matrix normal_matrix(int rows, int cols) {
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = normal();
        return m;
    }

private:
    std::mt19937_64 gen_;
};

// Silences warn() for the lifetime of the guard and counts the messages.
class WarningCapture {
public:
    WarningCapture() {
        previous_ = set_warning_handler([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningCapture() { set_warning_handler(previous_); }
    std::vector<std::string> messages;

private:
    WarningHandler previous_;
};

// Generic QBM parameters. Harmonic particles keep a positive definite
// potential; for free particles kappa_i <= m_i w_i^2 / 4, which keeps the
// center-of-mass stiffness sum_ij K_ij positive for either sign.
inline model::ModelParams random_model(Rng& rng, int n_bath, bool free_particle) {
    model::ModelParams p;
    p.m1 = rng.uniform(0.5, 2.0);
    if (free_particle)
        p.potential = model::FreePotential{};
    else
        p.potential = model::HarmonicPotential{rng.uniform(0.7, 1.5)};
    p.coupling_sign = rng.coin() ? model::CouplingSign::Plus : model::CouplingSign::Minus;
    const double stiffness = free_particle ? 0.0 : p.m1 * std::pow(std::get<model::HarmonicPotential>(p.potential).omega, 2);
    for (int i = 0; i < n_bath; ++i) {
        model::BathMode b;
        b.mass = rng.uniform(0.5, 2.0);
        b.omega = rng.uniform(0.5, 3.0);
        // kappa^2 / (m w^2) summed over the bath stays below half the particle
        // stiffness
        const double cap = free_particle ? 0.25 * b.mass * b.omega * b.omega
                                         : std::sqrt(0.5 * stiffness * b.mass * b.omega * b.omega / n_bath);
        b.coupling = rng.uniform(0.1, 1.0) * cap;
        p.bath.push_back(b);
    }
    return p;
}

// Harmonic particle (m1 = 1, w = 1) coupled to a linear-grid Ohmic bath with
// cutoff 5, masses and frequencies perturbed by 10% from `seed`.
inline experiments::ScenarioConfig ohmic(int modes, double gamma, double temperature, bool purified,
                                         std::uint64_t seed, double t_max = 20.0, int points = 41) {
    experiments::ScenarioConfig cfg;
    model::ModelParams p;
    p.m1 = 1.0;
    p.potential = model::HarmonicPotential{1.0};
    p.bath = model::discretize_bath({modes, gamma, 5.0, model::GridScheme::Linear});
    cfg.model = experiments::perturb(p, 0.1, seed);
    cfg.initial.x0 = 1.0;
    cfg.initial.p0 = 0.5;
    cfg.initial.bath_temperature = temperature;
    cfg.purified = purified;
    cfg.times = experiments::uniform_grid(t_max, points);
    return cfg;
}

// Independent evaluation of the classical QBM energy at phase-space point z.
inline double qbm_energy(const model::ModelParams& p, const Vector& z) {
    const int n = p.n_modes();
    const double x1 = z(0), p1 = z(n);
    double e = p1 * p1 / (2.0 * p.m1);
    if (const auto* h = std::get_if<model::HarmonicPotential>(&p.potential)) e += 0.5 * p.m1 * h->omega * h->omega * x1 * x1;
    const double sign = p.coupling_sign == model::CouplingSign::Plus ? 1.0 : -1.0;
    for (int i = 1; i < n; ++i) {
        const auto& b = p.bath[static_cast<std::size_t>(i - 1)];
        const double x = z(i), q = z(n + i);
        e += q * q / (2.0 * b.mass) + 0.5 * b.mass * b.omega * b.omega * x * x + sign * x1 * b.coupling * x;
    }
    return e;
}

// Random symplectic matrix: product of a random linear canonical lift, a
// symmetric shear, and per-mode rotations and squeezes.
inline Matrix random_symplectic(Rng& rng, int n) {
    Matrix t = Matrix::Identity(n, n) + 0.4 * rng.normal_matrix(n, n);
    Matrix lift = Matrix::Zero(2 * n, 2 * n);
    lift.topLeftCorner(n, n) = t;
    lift.bottomRightCorner(n, n) = t.inverse().transpose();

    Matrix a = 0.3 * rng.normal_matrix(n, n);
    a = 0.5 * (a + a.transpose()).eval();
    Matrix shear = Matrix::Identity(2 * n, 2 * n);
    shear.bottomLeftCorner(n, n) = a;

    Matrix local = Matrix::Identity(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        const double th = rng.uniform(0.0, 6.283185307179586);
        const double r = rng.uniform(-0.5, 0.5);
        const double c = std::cos(th), s = std::sin(th);
        local(k, k) = c * std::exp(r);
        local(k, n + k) = s * std::exp(r);
        local(n + k, k) = -s * std::exp(-r);
        local(n + k, n + k) = c * std::exp(-r);
    }
    return local * shear * lift;
}

inline gaussian::GaussianState random_pure_state(Rng& rng, int n) {
    const Matrix s = random_symplectic(rng, n);
    Vector mean(2 * n);
    for (int i = 0; i < 2 * n; ++i) mean(i) = rng.uniform(-1.0, 1.0);
    return gaussian::GaussianState(mean, 0.5 * s * s.transpose());
}

inline gaussian::GaussianState random_mixed_state(Rng& rng, int n) {
    const Matrix s = random_symplectic(rng, n);
    Vector nu(2 * n);
    for (int k = 0; k < n; ++k) nu(k) = nu(n + k) = 0.5 + rng.uniform(0.0, 1.5);
    Vector mean(2 * n);
    for (int i = 0; i < 2 * n; ++i) mean(i) = rng.uniform(-1.0, 1.0);
    return gaussian::GaussianState(mean, s * nu.asDiagonal() * s.transpose());
}

// Two-mode squeezed vacuum with squeezing r (modes 0 and 1).
inline gaussian::GaussianState two_mode_squeezed(double r) {
    const double c = std::cosh(2.0 * r) / 2.0, s = std::sinh(2.0 * r) / 2.0;
    Matrix cov = Matrix::Zero(4, 4);
    cov(0, 0) = cov(1, 1) = cov(2, 2) = cov(3, 3) = c;
    cov(0, 1) = cov(1, 0) = s;
    cov(2, 3) = cov(3, 2) = -s;
    return gaussian::GaussianState(Vector::Zero(4), cov);
}

} // namespace qbm::testing
