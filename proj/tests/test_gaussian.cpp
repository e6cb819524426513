#include "support.hpp"

#include "qbm/gaussian.hpp"

#include <doctest.h>

#include <numbers>

using namespace qbm;
using namespace qbm::gaussian;

namespace {

// Symplectic acting on mode 0 and on modes 1..n-1 separately.
Matrix local_symplectic(testing::Rng& rng, int n) {
    return phase_space_direct_sum(testing::random_symplectic(rng, 1), testing::random_symplectic(rng, n - 1));
}

model::QuadraticHamiltonian single_mode(double mass, double omega) {
    Matrix k = Matrix::Zero(2, 2);
    k(0, 0) = mass * omega * omega;
    k(1, 1) = 1.0 / mass;
    return model::QuadraticHamiltonian(k);
}

} // namespace

TEST_CASE("coherent states") {
    const auto vac = coherent_state(2, 1, 0.0, 0.0);
    CHECK(max_abs(vac.cov() - 0.5 * Matrix::Identity(4, 4)) == 0.0);
    CHECK(vac.mean().isZero());

    const auto s = coherent_state(3, 1, 0.7, -0.2, {2.0, 1.5});
    CHECK(s.mean()(1) == 0.7);
    CHECK(s.mean()(4) == -0.2);
    CHECK(s.cov()(1, 1) == doctest::Approx(1.0 / 6.0));
    CHECK(s.cov()(1, 1) * s.cov()(4, 4) == doctest::Approx(0.25));
    CHECK(purity(s) == doctest::Approx(1.0));
    CHECK(s.is_pure());
    CHECK_THROWS_AS(coherent_state(2, 2, 0.0, 0.0), DomainError);
}

TEST_CASE("thermal states") {
    const std::vector<ModeWidth> one{{1.0, 1.0}};
    CHECK(max_abs(thermal_state(one, 0.0).cov() - 0.5 * Matrix::Identity(2, 2)) == 0.0);
    CHECK(thermal_state(one, 100.0).cov()(0, 0) == doctest::Approx(100.0).epsilon(0.01));
    // w / 2T = 1
    CHECK(purity(thermal_state(one, 0.5)) == doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
    const std::vector<ModeWidth> two{{1.0, 1.0}, {2.0, 0.5}};
    const auto t2 = thermal_state(two, 0.8);
    CHECK(purity(t2) == doctest::Approx(std::tanh(1.0 / 1.6) * std::tanh(0.5 / 1.6)).epsilon(1e-12));
    CHECK_THROWS_AS(thermal_state(one, -1.0), DomainError);
}

TEST_CASE("state validation") {
    CHECK_THROWS_AS(GaussianState(Vector::Zero(2), 0.1 * Matrix::Identity(2, 2)), DomainError);
    CHECK_THROWS_AS(GaussianState(Vector::Zero(3), Matrix::Identity(3, 3)), DimensionError);
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 0.1;
    CHECK_THROWS_AS(GaussianState(Vector::Zero(2), asym), DomainError);
}

TEST_CASE("purification") {
    const std::vector<ModeWidth> one{{1.0, 1.0}};
    const auto vac = purify(thermal_state(one, 0.0));
    CHECK(max_abs(vac.cov() - 0.5 * Matrix::Identity(4, 4)) < 1e-12);

    const auto th = thermal_state(one, 1.0);
    CHECK(max_abs(reduce(purify(th), {0}).cov() - th.cov()) < 1e-10);

    testing::Rng rng(31);
    for (int draw = 0; draw < 20; ++draw) {
        const int n = rng.integer(1, 4);
        const auto s = testing::random_mixed_state(rng, n);
        const auto p = purify(s);
        CHECK(p.n_modes() == 2 * n);
        CHECK(purity(p) == doctest::Approx(1.0).epsilon(1e-9));
        const auto back = reduce(p, all_modes(n));
        CHECK(max_abs(back.cov() - s.cov()) < 1e-10 * std::max(1.0, max_abs(s.cov())));
        CHECK(max_abs(back.mean() - s.mean()) < 1e-12);
    }
}

TEST_CASE("Williamson decomposition") {
    testing::Rng rng(32);
    for (int draw = 0; draw < 20; ++draw) {
        const int n = rng.integer(1, 4);
        const auto s = testing::random_mixed_state(rng, n);
        const auto w = williamson(s.cov());
        CHECK(symplectic_defect(w.s) < 1e-9);
        Vector d(2 * n);
        d << w.nu, w.nu;
        CHECK(max_abs(w.s * d.asDiagonal() * w.s.transpose() - s.cov()) < 1e-9 * max_abs(s.cov()));
        for (int k = 1; k < n; ++k) CHECK(w.nu(k) >= w.nu(k - 1));
    }
}

TEST_CASE("propagator closed forms") {
    const auto free = model::QuadraticHamiltonian([] {
        Matrix k = Matrix::Zero(2, 2);
        k(1, 1) = 0.5;  // m = 2
        return k;
    }());
    const Matrix s = propagator(free, 3.0);
    CHECK(s(0, 0) == doctest::Approx(1.0));
    CHECK(s(0, 1) == doctest::Approx(1.5));
    CHECK(s(1, 0) == doctest::Approx(0.0));
    CHECK(s(1, 1) == doctest::Approx(1.0));

    const Matrix r = propagator(single_mode(1.0, 1.0), std::numbers::pi / 2.0);
    Matrix expected(2, 2);
    expected << 0.0, 1.0, -1.0, 0.0;
    CHECK(max_abs(r - expected) < 1e-14);
    CHECK(max_abs(propagator(single_mode(1.0, 1.0), 0.0) - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("propagator properties") {
    testing::Rng rng(33);
    testing::WarningCapture quiet;
    for (int draw = 0; draw < 20; ++draw) {
        const auto p = testing::random_model(rng, rng.integer(1, 8), false);
        const auto h = model::build_qbm_hamiltonian(p);
        const double t1 = rng.uniform(0.0, 5.0), t2 = rng.uniform(0.0, 5.0);
        const Matrix s1 = propagator(h, t1), s2 = propagator(h, t2), s12 = propagator(h, t1 + t2);
        CHECK(symplectic_defect(s12) < 1e-10);
        CHECK(max_abs(s2 * s1 - s12) < 1e-8);
        CHECK(max_abs(propagator_spectral(h, t1) - s1) < 1e-9);
    }
    const auto free = model::QuadraticHamiltonian([] {
        Matrix k = Matrix::Zero(2, 2);
        k(1, 1) = 1.0;
        return k;
    }());
    CHECK_THROWS_AS(propagator_spectral(free, 1.0), ConditioningError);
}

TEST_CASE("energy is conserved") {
    testing::Rng rng(34);
    testing::WarningCapture quiet;
    for (int draw = 0; draw < 20; ++draw) {
        const auto p = testing::random_model(rng, rng.integer(1, 6), rng.coin());
        const auto h = model::build_qbm_hamiltonian(p);
        const auto s0 = testing::random_mixed_state(rng, p.n_modes());
        const double e0 = h.expectation(s0.mean(), s0.cov());
        for (double t : {0.5, 2.0, 7.0}) {
            const auto st = evolve(s0, propagator(h, t));
            CHECK(h.expectation(st.mean(), st.cov()) == doctest::Approx(e0).epsilon(1e-8));
        }
    }
}

TEST_CASE("evolution invariants") {
    testing::Rng rng(35);
    for (int draw = 0; draw < 20; ++draw) {
        const int n = rng.integer(1, 5);
        const auto s = testing::random_mixed_state(rng, n);
        const auto same = evolve(s, Matrix::Identity(2 * n, 2 * n));
        CHECK(max_abs(same.cov() - s.cov()) == 0.0);
        const auto moved = evolve(s, testing::random_symplectic(rng, n));  // validates uncertainty
        CHECK(purity(moved) == doctest::Approx(purity(s)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(evolve(coherent_state(2, 0, 0, 0), Matrix::Identity(2, 2)), DimensionError);
}

TEST_CASE("partial trace") {
    const auto prod = product(coherent_state(1, 0, 0, 0), coherent_state(1, 0, 0, 0));
    CHECK(max_abs(reduce(prod, {0}).cov() - 0.5 * Matrix::Identity(2, 2)) == 0.0);
    const double r = 0.4;
    CHECK(reduce(testing::two_mode_squeezed(r), {1}).cov()(0, 0) == doctest::Approx(std::cosh(2 * r) / 2));
    testing::Rng rng(36);
    const auto s = testing::random_mixed_state(rng, 3);
    CHECK(max_abs(reduce(s, {0, 1, 2}).cov() - s.cov()) == 0.0);
    CHECK_THROWS_AS(reduce(s, {3}), DomainError);
    CHECK_THROWS_AS(reduce(s, {}), DomainError);
}

TEST_CASE("purity") {
    testing::Rng rng(37);
    const auto a = testing::random_mixed_state(rng, 2);
    const auto b = testing::random_mixed_state(rng, 1);
    CHECK(purity(product(a, b)) == doctest::Approx(purity(a) * purity(b)).epsilon(1e-12));
    for (int draw = 0; draw < 20; ++draw) {
        const int n = rng.integer(2, 5);
        const auto s = testing::random_pure_state(rng, n);
        const int cut = rng.integer(1, n - 1);
        ModeSet left;
        for (int k = 0; k < cut; ++k) left.push_back(k);
        const double pa = purity(reduce(s, left));
        const double pb = purity(reduce(s, complement(left, n)));
        CHECK(pa == doctest::Approx(pb).epsilon(1e-8));
        CHECK(pa <= 1.0 + 1e-12);
    }
}

TEST_CASE("logarithmic negativity") {
    CHECK(log_negativity(product(coherent_state(1, 0, 1, 0), coherent_state(1, 0, 0, 2)), {0}) == 0.0);
    for (double r : {0.1, 0.3, 0.8})
        CHECK(log_negativity(testing::two_mode_squeezed(r), {0}) == doctest::Approx(2 * r / std::numbers::ln2));

    testing::Rng rng(38);
    for (int draw = 0; draw < 20; ++draw) {
        const int n = rng.integer(2, 4);
        const auto s = draw % 2 ? testing::random_pure_state(rng, n) : testing::random_mixed_state(rng, n);
        const double e = log_negativity(s, {0});
        CHECK(log_negativity(evolve(s, local_symplectic(rng, n)), {0}) == doctest::Approx(e).epsilon(1e-8));
        const auto p = product(testing::random_mixed_state(rng, 1), testing::random_mixed_state(rng, n - 1));
        CHECK(log_negativity(p, {0}) == 0.0);
    }
    const auto s = testing::two_mode_squeezed(0.2);
    CHECK_THROWS_AS(log_negativity(s, {0, 1}), DomainError);
    CHECK_THROWS_AS(log_negativity(s, {}), DomainError);
}

TEST_CASE("overlaps") {
    const auto a = coherent_state(1, 0, 0.0, 0.0);
    const auto b = coherent_state(1, 0, 2.0, 0.0);
    CHECK(std::abs(overlap(a, a)) == doctest::Approx(1.0));
    CHECK(std::abs(overlap(a, b)) == doctest::Approx(std::exp(-1.0)));
    CHECK(overlap_magnitude(a, b) == doctest::Approx(std::exp(-1.0)));

    // <alpha|beta> = exp(-|alpha|^2/2 - |beta|^2/2 + conj(alpha) beta), alpha = (x + i p)/sqrt2
    const Complex alpha{0.3 / std::numbers::sqrt2, -0.8 / std::numbers::sqrt2};
    const Complex beta{-0.5 / std::numbers::sqrt2, 0.4 / std::numbers::sqrt2};
    const Complex expected = std::exp(-std::norm(alpha) / 2.0 - std::norm(beta) / 2.0 + std::conj(alpha) * beta);
    const Complex got = overlap(coherent_state(1, 0, 0.3, -0.8), coherent_state(1, 0, -0.5, 0.4));
    CHECK(got.real() == doctest::Approx(expected.real()));
    CHECK(got.imag() == doctest::Approx(expected.imag()));

    double previous = 1.0;
    for (double d = 0.5; d < 6.0; d += 0.5) {
        const double m = overlap_magnitude(a, coherent_state(1, 0, d, 0.3 * d));
        CHECK(m < previous);
        previous = m;
    }

    testing::Rng rng(39);
    for (int draw = 0; draw < 20; ++draw) {
        const int n = rng.integer(1, 4);
        const auto x = testing::random_pure_state(rng, n);
        const auto y = testing::random_pure_state(rng, n);
        const Complex xy = overlap(x, y);
        CHECK(std::abs(xy) == doctest::Approx(overlap_magnitude(x, y)).epsilon(1e-9));
        CHECK(std::abs(xy) <= 1.0 + 1e-12);
        const Complex yx = overlap(y, x);
        CHECK(std::abs(xy - std::conj(yx)) < 1e-10);
        CHECK(std::abs(overlap(x, x) - 1.0) < 1e-10);
    }
    CHECK_THROWS_AS(overlap(thermal_state(std::vector<ModeWidth>{{1, 1}}, 1.0), a), DomainError);
}

TEST_CASE("conditioning on a coherent outcome") {
    // Projecting one half of a two-mode squeezed vacuum onto |alpha> leaves the
    // other half in |tanh(r) conj(alpha)>.
    const double r = 0.5;
    Vector outcome(2);
    outcome << 0.6, -0.4;
    const auto e = condition_on_coherent(testing::two_mode_squeezed(r), {0}, outcome);
    CHECK(max_abs(e.cov() - 0.5 * Matrix::Identity(2, 2)) < 1e-12);
    CHECK(e.mean()(0) == doctest::Approx(std::tanh(r) * 0.6));
    CHECK(e.mean()(1) == doctest::Approx(std::tanh(r) * 0.4));
    CHECK_THROWS_AS(condition_on_coherent(testing::two_mode_squeezed(r), {0, 1}, Vector::Zero(4)), DomainError);
}

TEST_CASE("cat states") {
    const auto g = coherent_state(2, 0, 0, 0);
    Vector m1 = Vector::Zero(4), m2 = Vector::Zero(4);
    m1(0) = 1.0;
    m2(0) = -1.0;
    const CatState cat({{Complex{1, 0}, m1}, {Complex{0, 1}, m2}}, g.cov());
    CHECK(cat.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(decoherence_factor(cat, {1}) == doctest::Approx(1.0));

    testing::Rng rng(40);
    const Matrix s = testing::random_symplectic(rng, 2);
    CHECK(evolve(cat, s).norm() == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(CatState({{Complex{1, 0}, m1}}, g.cov()), DomainError);
    const CatState three({{Complex{1, 0}, m1}, {Complex{1, 0}, m2}, {Complex{1, 0}, Vector::Zero(4)}}, g.cov());
    CHECK_THROWS_AS(decoherence_factor(three, {1}), DomainError);
    CHECK_THROWS_AS(CatState({{Complex{1, 0}, m1}, {Complex{1, 0}, m2}}, Matrix::Identity(4, 4)), DomainError);
}

TEST_CASE("decoherence factor without coupling stays at one") {
    testing::Rng rng(41);
    auto p = testing::random_model(rng, 3, false);
    for (auto& b : p.bath) b.coupling = 0.0;
    const auto h = model::build_qbm_hamiltonian(p);
    const ModeWidth width{p.m1, 1.0};
    std::vector<ModeWidth> widths;
    for (const auto& b : p.bath) widths.push_back({b.mass, b.omega});
    const auto global = product(coherent_state(1, 0, 0, 0, width), thermal_state(widths, 0.0));
    Vector a = global.mean(), b = global.mean();
    a(0) = 1.5;
    b(0) = -1.5;
    const CatState cat({{Complex{1, 0}, a}, {Complex{1, 0}, b}}, global.cov());
    for (double t : {0.0, 1.0, 4.0, 9.0})
        CHECK(decoherence_factor(evolve(cat, propagator(h, t)), {1, 2, 3}, width) == doctest::Approx(1.0).epsilon(1e-10));
}
