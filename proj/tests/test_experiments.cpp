#include "support.hpp"

#include "qbm/experiments.hpp"

#include <doctest.h>

#include <cstdlib>
#include <numbers>

using namespace qbm;
using namespace qbm::experiments;
using qbm::testing::ohmic;

namespace {

// Simpson rule on [lo, hi] with 2 * half_steps intervals.
template <class F>
double simpson(F f, double lo, double hi, int half_steps) {
    const int n = 2 * half_steps;
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

class ThreadsEnv {
public:
    explicit ThreadsEnv(const char* value) { ::setenv("QBM_NUM_THREADS", value, 1); }
    ~ThreadsEnv() { ::unsetenv("QBM_NUM_THREADS"); }
};

} // namespace

TEST_CASE("scenario validation") {
    auto cfg = ohmic(2, 0.1, 0.0, false, 1);
    cfg.times = {0.5, 1.0};
    CHECK_THROWS_WITH_AS(prepare(cfg), doctest::Contains("start at 0"), DomainError);
    cfg.times = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(prepare(cfg), DomainError);
    cfg.times = {0.0};
    cfg.initial.width_omega = 0.0;
    CHECK_THROWS_WITH_AS(prepare(cfg), doctest::Contains("width_omega"), DomainError);
    cfg.initial.width_omega = 1.0;
    cfg.alternate = structure::StructureMap::identity(2);
    CHECK_THROWS_AS(prepare(cfg), DimensionError);
}

TEST_CASE("prepared universe") {
    const auto u = prepare(ohmic(3, 0.2, 1.0, true, 2));
    CHECK(u.physical_modes == 4);
    CHECK(u.ancillas == 4);
    CHECK(u.initial.is_pure());
    CHECK(u.map.labels()[0] == "S'");
    CHECK(symplectic_defect(u.propagator(2.0)) < 1e-10);
    const std::vector<ModeSet> split{{0}, {1, 2, 3}};
    const structure::StructureMap physical(u.map.t().topLeftCorner(4, 4), {"a", "b", "c", "d"});
    CHECK(structure::irreducibility_report(physical, split, split).is_irreducible);
}

TEST_CASE("perturbation is reproducible") {
    model::ModelParams p;
    p.bath = model::discretize_bath({4, 0.2, 5.0, model::GridScheme::Linear});
    const auto a = perturb(p, 0.1, 7), b = perturb(p, 0.1, 7), c = perturb(p, 0.1, 8);
    CHECK(a.m1 == b.m1);
    CHECK(a.bath[2].omega == b.bath[2].omega);
    CHECK(a.bath[2].omega != c.bath[2].omega);
    CHECK(std::abs(a.bath[3].mass - 1.0) <= 0.1);
    CHECK(a.bath[1].coupling == p.bath[1].coupling);
    CHECK(perturb(p, 0.0, 3).bath[0].omega == p.bath[0].omega);
    CHECK_THROWS_AS(perturb(p, 1.0, 3), DomainError);
}

TEST_CASE("decoupled universe") {
    const auto r = run_pod(ohmic(4, 0.0, 0.0, false, 3));
    for (const auto& s : r.samples) {
        CHECK(s.purity_1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.neg_12 < 1e-12);
    }
    CHECK_FALSE(r.half_time_1.has_value());
}

TEST_CASE("both open systems decohere in one evolution") {
    for (std::uint64_t seed : {4u, 5u, 6u}) {
        const auto r = run_pod(ohmic(6, 0.2, 0.0, false, seed));
        for (std::size_t i = 1; i < r.samples.size(); ++i) {
            CHECK(r.samples[i].purity_1 < 1.0);
            CHECK(r.samples[i].purity_sp < 1.0);
        }
        for (const auto& s : r.samples) {
            CHECK(s.purity_1 <= 1.0 + 1e-12);
            CHECK(s.purity_sp > 0.0);
            CHECK(s.neg_12 >= 0.0);
            CHECK(s.neg_spep >= 0.0);
        }
        CHECK(r.half_time_1.has_value());
    }
}

TEST_CASE("early-time decoherence is monotone") {
    for (std::uint64_t seed : {7u, 8u}) {
        // the first quarter period of the fastest bath mode (about 0.3) holds 31 points
        const auto r = run_pod(ohmic(8, 0.2, 2.0, true, seed, 3.0, 301));
        CHECK_FALSE(r.early_increase_1);
    }
}

TEST_CASE("half-time of a known curve") {
    std::vector<double> t, p;
    for (int i = 0; i <= 2000; ++i) {
        t.push_back(0.01 * i);
        p.push_back(0.5 + 0.5 * std::exp(-t.back()));
    }
    const auto h = half_time(t, p);
    REQUIRE(h.has_value());
    // plateau over t in [16, 20] is 0.5 + O(1e-8)
    CHECK(*h == doctest::Approx(std::log(2.0)).epsilon(1e-4));
    CHECK_FALSE(half_time(t, std::vector<double>(t.size(), 0.7)).has_value());
    CHECK_THROWS_AS(half_time(t, {1.0}), DimensionError);
}

TEST_CASE("entanglement relativity") {
    const auto cfg = ohmic(5, 0.2, 0.0, false, 9, 10.0, 11);
    const auto r = run_er_check(cfg);
    CHECK(r.samples[0].neg_12 < kSeparableThreshold);
    CHECK(r.samples[0].neg_spep > kWitnessThreshold);
    CHECK(r.samples[0].witnessed);

    auto same = cfg;
    same.alternate = structure::StructureMap::identity(6);
    for (const auto& s : run_er_check(same).samples) CHECK(s.neg_12 == s.neg_spep);

    auto decoupled = ohmic(5, 0.0, 0.0, false, 9, 10.0, 11);
    for (const auto& s : run_er_check(decoupled).samples) CHECK(s.neg_12 < 1e-12);

    auto mixed = ohmic(5, 0.2, 1.0, false, 9);
    CHECK_THROWS_AS(run_er_check(mixed), DomainError);
    mixed.purified = true;
    CHECK(run_er_check(mixed).samples[0].neg_12 < kSeparableThreshold);
}

TEST_CASE("branch exclusivity") {
    const auto cfg = ohmic(6, 0.2, 0.0, false, 10, 20.0, 21);
    const auto r = run_exclusivity(cfg);
    for (const auto& s : r.samples) CHECK(s.neg_12 < 1e-10);
    CHECK(r.samples[0].neg_spep > kWitnessThreshold);
    CHECK(r.excluding_fraction > 0.9);

    auto same = cfg;
    same.alternate = structure::StructureMap::identity(7);
    same.times = {0.0};
    CHECK(run_exclusivity(same).samples[0].neg_spep < 1e-12);

    auto thermal = cfg;
    thermal.initial.particle = ParticleState::Thermal;
    thermal.initial.particle_temperature = 0.5;
    CHECK_THROWS_AS(run_exclusivity(thermal), DomainError);
}

TEST_CASE("branch proxy is a product with the conditioned bath") {
    const auto cfg = ohmic(3, 0.2, 1.0, true, 11);
    const auto u = prepare(cfg);
    const auto global = gaussian::evolve(u.initial, u.propagator(3.0));
    const auto proxy = branch_proxy(u, global);
    CHECK(proxy.is_pure());
    CHECK(proxy.mean()(0) == doctest::Approx(global.mean()(0)));
    CHECK(proxy.mean()(proxy.n_modes()) == doctest::Approx(global.mean()(global.n_modes())));
    CHECK(max_abs(gaussian::reduce(proxy, {0}).cov() - gaussian::coherent_state(1, 0, 0, 0, u.particle_width).cov()) < 1e-14);
}

TEST_CASE("exact L1 distance between normal densities") {
    CHECK(gaussian_l1_distance(0.3, 1.2, 0.3, 1.2) == 0.0);
    // equal widths: 2 (2 Phi(d / 2s) - 1)
    CHECK(gaussian_l1_distance(0.0, 1.0, 1.0, 1.0) == doctest::Approx(2.0 * std::erf(0.5 / std::numbers::sqrt2)));
    testing::Rng rng(61);
    for (int draw = 0; draw < 50; ++draw) {
        const double ma = rng.uniform(-2, 2), mb = rng.uniform(-2, 2);
        const double va = rng.uniform(0.05, 3.0), vb = draw % 5 == 0 ? va : rng.uniform(0.05, 3.0);
        const double lo = std::min(ma, mb) - 12.0 * std::sqrt(std::max(va, vb));
        const double hi = std::max(ma, mb) + 12.0 * std::sqrt(std::max(va, vb));
        const double numeric = simpson([&](double x) { return std::abs(normal_pdf(x, ma, va) - normal_pdf(x, mb, vb)); },
                                       lo, hi, 200000);
        const double exact = gaussian_l1_distance(ma, va, mb, vb);
        CHECK(std::abs(exact - numeric) < 1e-6);
        const double c = rng.uniform(-5, 5);
        CHECK(gaussian_l1_distance(ma + c, va, mb + c, vb) == doctest::Approx(exact).epsilon(1e-10));
    }
    CHECK_THROWS_AS(gaussian_l1_distance(0, 0, 0, 1), DomainError);
}

TEST_CASE("marginal incompatibility") {
    auto cfg = ohmic(4, 0.2, 0.0, false, 12, 10.0, 6);
    const auto generic = marginal_incompatibility(cfg, 0.0);
    CHECK(generic.l1_distance > 0.1);

    auto same = cfg;
    same.alternate = structure::StructureMap::identity(5);
    for (const auto& r : marginal_incompatibility(same)) CHECK(r.l1_distance < 1e-10);

    // displacing every position by c moves the particle and the center of mass
    // alike, so the distance is unchanged
    const auto u = prepare(cfg);
    const auto s = gaussian::evolve(u.initial, u.propagator(2.0));
    Vector shift = Vector::Zero(s.mean().size());
    shift.head(s.n_modes()).setConstant(0.8);
    const auto d = gaussian::displaced(s, shift);
    auto l1 = [&](const gaussian::GaussianState& x) {
        const auto alt = gaussian::evolve(x, u.map.lift());
        return gaussian_l1_distance(alt.mean()(0), alt.cov()(0, 0), x.mean()(0), x.cov()(0, 0));
    };
    CHECK(l1(d) == doctest::Approx(l1(s)).epsilon(1e-10));
    CHECK(marginal_incompatibility(cfg, 2.0).l1_distance == doctest::Approx(l1(s)).epsilon(1e-12));
}

TEST_CASE("one dynamics, two descriptions") {
    // S'-side covariance from the transformed state equals evolution under the
    // transformed Hamiltonian started from the transformed initial state.
    const auto cfg = ohmic(5, 0.2, 0.0, false, 13);
    const auto u = prepare(cfg);
    const Matrix lift = u.map.lift();
    const auto h_alt = structure::transform_hamiltonian(u.hamiltonian, u.map);
    const auto alt0 = gaussian::evolve(u.initial, lift);
    for (double t : {0.7, 3.0, 11.0}) {
        const auto schrodinger = gaussian::evolve(gaussian::evolve(u.initial, u.propagator(t)), lift);
        const auto heisenberg = gaussian::evolve(alt0, gaussian::propagator(h_alt, t));
        CHECK(max_abs(schrodinger.cov() - heisenberg.cov()) < 1e-8);
        CHECK((schrodinger.mean() - heisenberg.mean()).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("results do not depend on the thread count") {
    const auto cfg = ohmic(6, 0.2, 2.0, true, 14);
    PODReport one, many;
    {
        ThreadsEnv env("1");
        CHECK(thread_count() == 1);
        one = run_pod(cfg);
    }
    {
        ThreadsEnv env("5");
        many = run_pod(cfg);
    }
    REQUIRE(one.samples.size() == many.samples.size());
    for (std::size_t i = 0; i < one.samples.size(); ++i) {
        CHECK(one.samples[i].purity_1 == many.samples[i].purity_1);
        CHECK(one.samples[i].neg_spep == many.samples[i].neg_spep);
    }
    ThreadsEnv bad("zero");
    CHECK_THROWS_WITH_AS(thread_count(), doctest::Contains("QBM_NUM_THREADS"), DomainError);
}

TEST_CASE("oracle comparison for one bath mode") {
    ScenarioConfig cfg;
    cfg.model.bath = {model::BathMode{1.0, 1.2, 0.3}};
    cfg.initial.x0 = 1.0;
    cfg.initial.p0 = 0.5;
    cfg.times = uniform_grid(6.0 * std::numbers::pi, 10);
    const auto r = run_oracle_compare(cfg, {20, 10, 60, 1e-8});
    CHECK(r.max_abs_diff < 1e-6);
    CHECK(r.convergence_change < 1e-8);
    CHECK(r.samples.back().decoherence_gauss < 1.0);

    auto hot = cfg;
    hot.initial.bath_temperature = 1.0;
    CHECK_THROWS_AS(run_oracle_compare(hot), DomainError);
    CHECK_THROWS_AS(run_oracle_compare(cfg, {4, 1, 6, 1e-30}), ConditioningError);
}
