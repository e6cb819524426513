#include "qbm/experiments.hpp"

#include "qbm/errors.hpp"
#include "qbm/fock.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

namespace qbm::experiments {

namespace {

using gaussian::GaussianState;

// Runs fn(0..n-1) on the worker pool. Results must be written by index; the
// exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ModeSet range_modes(int first, int last) {
    ModeSet out;
    for (int k = first; k < last; ++k) out.push_back(k);
    return out;
}

void require_pure(const Universe& u, const char* what) {
    if (!u.initial.is_pure())
        throw DomainError(std::string(what) + ": global state is mixed; set purified or use a zero-temperature bath");
}

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

} // namespace

int thread_count() {
    if (const char* env = std::getenv("QBM_NUM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 4096)
            throw DomainError("QBM_NUM_THREADS must be a positive integer, got \"" + std::string(env) + "\"");
        return static_cast<int>(v);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// ---------------------------------------------------------------------------

void ScenarioConfig::validate() const {
    model.validate();
    if (times.empty()) throw DomainError("times: grid is empty");
    if (times.front() != 0.0) throw DomainError("times: grid must start at 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw DomainError("times: non-finite entry");
        if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("times: grid must be strictly increasing");
    }
    if (!std::isfinite(initial.x0)) throw DomainError("x0 must be finite");
    if (!std::isfinite(initial.p0)) throw DomainError("p0 must be finite");
    if (!(initial.width_omega > 0.0) || !std::isfinite(initial.width_omega))
        throw DomainError("width_omega must be positive");
    if (!(initial.particle_temperature >= 0.0) || !std::isfinite(initial.particle_temperature))
        throw DomainError("particle_temperature must be non-negative");
    if (!(initial.bath_temperature >= 0.0) || !std::isfinite(initial.bath_temperature))
        throw DomainError("bath_temperature must be non-negative");
    if (alternate && alternate->n_modes() != model.n_modes())
        throw DimensionError("alternate structure map has " + std::to_string(alternate->n_modes()) +
                             " modes, the model has " + std::to_string(model.n_modes()));
}

Matrix Universe::propagator(double t) const {
    const Matrix s = gaussian::propagator(hamiltonian, t);
    return ancillas > 0 ? gaussian::extend_symplectic(s, ancillas) : s;
}

Universe prepare(const ScenarioConfig& cfg) {
    cfg.validate();
    auto h = model::build_qbm_hamiltonian(cfg.model);
    const int n = cfg.model.n_modes();
    structure::StructureMap map =
        cfg.alternate ? *cfg.alternate
                      : structure::alternate_structure(h, cfg.model.masses(), cfg.relative_scheme).map;

    const gaussian::ModeWidth width{cfg.model.m1, cfg.initial.width_omega};
    GaussianState particle = [&] {
        if (cfg.initial.particle == ParticleState::Coherent)
            return gaussian::coherent_state(1, 0, cfg.initial.x0, cfg.initial.p0, width);
        const std::vector<gaussian::ModeWidth> w{width};
        Vector shift(2);
        shift << cfg.initial.x0, cfg.initial.p0;
        return gaussian::displaced(gaussian::thermal_state(w, cfg.initial.particle_temperature), shift);
    }();
    std::vector<gaussian::ModeWidth> bath_widths;
    for (const auto& b : cfg.model.bath) bath_widths.push_back({b.mass, b.omega});
    GaussianState global = gaussian::product(particle, gaussian::thermal_state(bath_widths, cfg.initial.bath_temperature));

    int ancillas = 0;
    if (cfg.purified) {
        global = gaussian::purify(global);
        ancillas = n;
        map = map.extended(ancillas);
    }
    return Universe{std::move(h), std::move(map), std::move(global), n, ancillas, width};
}

model::ModelParams perturb(const model::ModelParams& params, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0.0 && amplitude < 1.0)) throw DomainError("perturbation must be in [0, 1)");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    model::ModelParams out = params;
    out.m1 *= 1.0 + amplitude * u(gen);
    for (auto& b : out.bath) {
        b.mass *= 1.0 + amplitude * u(gen);
        b.omega *= 1.0 + amplitude * u(gen);
    }
    return out;
}

std::vector<double> uniform_grid(double t_max, int points) {
    if (points < 1) throw DomainError("points must be >= 1");
    if (points == 1) return {0.0};
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be positive");
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = t_max * i / (points - 1);
    return out;
}

// ---------------------------------------------------------------------------

std::optional<double> half_time(const std::vector<double>& t, const std::vector<double>& purity) {
    if (t.size() != purity.size()) throw DimensionError("half_time: size mismatch");
    if (t.size() < 2) return std::nullopt;
    const std::size_t tail = std::min(t.size() - 1, static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(t.size()))));
    double plateau = 0.0;
    for (std::size_t i = tail; i < t.size(); ++i) plateau += purity[i];
    plateau /= static_cast<double>(t.size() - tail);
    // no decay beyond rounding noise
    if (!(purity.front() - plateau > 1e-9)) return std::nullopt;
    const double target = 0.5 * (purity.front() + plateau);
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (purity[i] < target && purity[i - 1] >= target) {
            const double f = (purity[i - 1] - target) / (purity[i - 1] - purity[i]);
            return t[i - 1] + f * (t[i] - t[i - 1]);
        }
    }
    return std::nullopt;
}

PODReport run_pod(const ScenarioConfig& cfg) {
    const Universe u = prepare(cfg);
    const Matrix lift = u.map.lift();
    const ModeSet first{0};

    PODReport report;
    report.samples.resize(cfg.times.size());
    parallel_for(cfg.times.size(), [&](std::size_t i) {
        const double t = cfg.times[i];
        const GaussianState s = gaussian::evolve(u.initial, u.propagator(t));
        const GaussianState alt = gaussian::evolve(s, lift);
        report.samples[i] = PODSample{t,
                                      gaussian::purity(gaussian::reduce(s, first)),
                                      gaussian::purity(gaussian::reduce(alt, first)),
                                      gaussian::log_negativity(s, first),
                                      gaussian::log_negativity(alt, first)};
    });

    std::vector<double> t, p1, psp;
    for (const auto& s : report.samples) {
        t.push_back(s.t);
        p1.push_back(s.purity_1);
        psp.push_back(s.purity_sp);
    }
    report.half_time_1 = half_time(t, p1);
    report.half_time_sp = half_time(t, psp);

    double fastest = 0.0;
    for (const auto& b : cfg.model.bath) fastest = std::max(fastest, b.omega);
    const double window = 0.25 * 2.0 * std::numbers::pi / fastest;
    auto scan = [&](const std::vector<double>& p, bool& early, bool& recurrence) {
        double running_min = p.front();
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (t[i] <= window) {
                if (p[i] > p[i - 1] + 1e-6) early = true;
            } else if (p[i] > running_min + 1e-3) {
                recurrence = true;
            }
            running_min = std::min(running_min, p[i]);
        }
    };
    scan(p1, report.early_increase_1, report.recurrence_1);
    scan(psp, report.early_increase_sp, report.recurrence_sp);
    return report;
}

// ---------------------------------------------------------------------------

ERReport run_er_check(const ScenarioConfig& cfg) {
    const Universe u = prepare(cfg);
    require_pure(u, "run_er_check");
    const Matrix lift = u.map.lift();
    const ModeSet first{0};

    ERReport report;
    report.samples.resize(cfg.times.size());
    parallel_for(cfg.times.size(), [&](std::size_t i) {
        const double t = cfg.times[i];
        const GaussianState s = gaussian::evolve(u.initial, u.propagator(t));
        const double a = gaussian::log_negativity(s, first);
        const double b = gaussian::log_negativity(gaussian::evolve(s, lift), first);
        const bool witnessed = (a < kSeparableThreshold && b > kWitnessThreshold) ||
                               (b < kSeparableThreshold && a > kWitnessThreshold);
        report.samples[i] = ERSample{t, a, b, witnessed};
    });
    return report;
}

// ---------------------------------------------------------------------------

GaussianState branch_proxy(const Universe& u, const GaussianState& global) {
    const int n = global.n_modes();
    Vector outcome(2);
    outcome << global.mean()(0), global.mean()(n);
    const GaussianState env = gaussian::condition_on_coherent(global, {0}, outcome, u.particle_width);
    const GaussianState particle = gaussian::coherent_state(1, 0, outcome(0), outcome(1), u.particle_width);
    return gaussian::product(particle, env);
}

ExclusivityReport run_exclusivity(const ScenarioConfig& cfg) {
    if (cfg.initial.particle != ParticleState::Coherent)
        throw DomainError("run_exclusivity: the particle must start in a coherent state");
    const Universe u = prepare(cfg);
    require_pure(u, "run_exclusivity");
    const Matrix lift = u.map.lift();
    const ModeSet first{0};

    ExclusivityReport report;
    report.samples.resize(cfg.times.size());
    parallel_for(cfg.times.size(), [&](std::size_t i) {
        const double t = cfg.times[i];
        const GaussianState proxy = branch_proxy(u, gaussian::evolve(u.initial, u.propagator(t)));
        const double a = gaussian::log_negativity(proxy, first);
        const double b = gaussian::log_negativity(gaussian::evolve(proxy, lift), first);
        report.samples[i] = ExclusivitySample{t, a, b, b > kWitnessThreshold};
    });
    std::size_t flagged = 0;
    for (const auto& s : report.samples) flagged += s.excluding ? 1 : 0;
    report.excluding_fraction = static_cast<double>(flagged) / static_cast<double>(report.samples.size());
    return report;
}

// ---------------------------------------------------------------------------

double gaussian_l1_distance(double mean_a, double var_a, double mean_b, double var_b) {
    if (!(var_a > 0.0) || !(var_b > 0.0)) throw DomainError("gaussian_l1_distance: variances must be positive");
    if (mean_a == mean_b && var_a == var_b) return 0.0;
    // log f_a - log f_b = c2 x^2 + c1 x + c0
    const double c2 = 0.5 / var_b - 0.5 / var_a;
    const double c1 = mean_a / var_a - mean_b / var_b;
    const double c0 = 0.5 * mean_b * mean_b / var_b - 0.5 * mean_a * mean_a / var_a + 0.5 * std::log(var_b / var_a);

    std::vector<double> cuts;
    const double scale = 1.0 / std::min(var_a, var_b);
    if (std::abs(c2) <= 1e-14 * scale) {
        if (c1 != 0.0) cuts.push_back(-c0 / c1);
    } else {
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc > 0.0) {
            const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
            cuts.push_back(q / c2);
            if (q != 0.0) cuts.push_back(c0 / q);
        } else if (disc == 0.0) {
            cuts.push_back(-c1 / (2.0 * c2));
        }
    }
    std::sort(cuts.begin(), cuts.end());

    const double sa = std::sqrt(var_a);
    const double sb = std::sqrt(var_b);
    double lo_a = 0.0, lo_b = 0.0, total = 0.0;
    for (double x : cuts) {
        const double fa = normal_cdf(x, mean_a, sa);
        const double fb = normal_cdf(x, mean_b, sb);
        total += std::abs((fa - lo_a) - (fb - lo_b));
        lo_a = fa;
        lo_b = fb;
    }
    total += std::abs((1.0 - lo_a) - (1.0 - lo_b));
    return total;
}

IncompatibilityReport marginal_incompatibility(const ScenarioConfig& cfg, double t) {
    const Universe u = prepare(cfg);
    const GaussianState s = gaussian::evolve(u.initial, u.propagator(t));
    const GaussianState alt = gaussian::evolve(s, u.map.lift());
    const double mean_sp = alt.mean()(0);
    const double var_sp = alt.cov()(0, 0);
    const double mean_1 = s.mean()(0);
    const double var_1 = s.cov()(0, 0);
    return IncompatibilityReport{t, gaussian_l1_distance(mean_sp, var_sp, mean_1, var_1), mean_sp, var_sp, mean_1, var_1};
}

std::vector<IncompatibilityReport> marginal_incompatibility(const ScenarioConfig& cfg) {
    const Universe u = prepare(cfg);
    const Matrix lift = u.map.lift();
    std::vector<IncompatibilityReport> out(cfg.times.size());
    parallel_for(cfg.times.size(), [&](std::size_t i) {
        const double t = cfg.times[i];
        const GaussianState s = gaussian::evolve(u.initial, u.propagator(t));
        const GaussianState alt = gaussian::evolve(s, lift);
        const double mean_sp = alt.mean()(0);
        const double var_sp = alt.cov()(0, 0);
        const double mean_1 = s.mean()(0);
        const double var_1 = s.cov()(0, 0);
        out[i] = IncompatibilityReport{t, gaussian_l1_distance(mean_sp, var_sp, mean_1, var_1), mean_sp, var_sp, mean_1, var_1};
    });
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Per-time quantities from one side of the oracle comparison.
struct OracleValues {
    double purity;
    double neg;
    double decoherence;
    Vector mean;  // particle (x, p)
    Matrix cov;   // particle 2 x 2
};

// Negativity is reported but not compared: from a truncated spectrum it sums
// sqrt(lambda) over the tail and converges far slower than the other values.
double values_diff(const OracleValues& a, const OracleValues& b) {
    return std::max({std::abs(a.purity - b.purity), std::abs(a.decoherence - b.decoherence),
                     (a.mean - b.mean).cwiseAbs().maxCoeff(), max_abs(a.cov - b.cov)});
}

double moment_diff(const OracleValues& a, const OracleValues& b) {
    return std::max((a.mean - b.mean).cwiseAbs().maxCoeff(), max_abs(a.cov - b.cov));
}

// The Fock side works in mode-adapted coordinates x~ = sqrt(s) x, p~ = p / sqrt(s)
// with s = m w of each mode's own width, so every unperturbed mode is a unit
// oscillator and the truncation only has to resolve the coupling. The map is a
// local symplectic rescaling: purity, negativity and the decoherence factor
// are unchanged, and particle moments are mapped back.
struct AdaptedFrame {
    model::ModelParams model;
    Vector scale;  // per phase-space coordinate, z~ = scale .* z
};

AdaptedFrame adapted_frame(const ScenarioConfig& cfg, const Universe& u) {
    const int n = u.physical_modes;
    std::vector<double> s(static_cast<std::size_t>(n));
    s[0] = u.particle_width.mass * u.particle_width.omega;
    for (int i = 1; i < n; ++i) {
        const auto& b = cfg.model.bath[static_cast<std::size_t>(i - 1)];
        s[static_cast<std::size_t>(i)] = b.mass * b.omega;
    }
    AdaptedFrame f{cfg.model, Vector(2 * n)};
    f.model.m1 = cfg.model.m1 / s[0];
    for (int i = 1; i < n; ++i) {
        auto& b = f.model.bath[static_cast<std::size_t>(i - 1)];
        b.mass /= s[static_cast<std::size_t>(i)];
        b.coupling /= std::sqrt(s[0] * s[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < n; ++i) {
        f.scale(i) = std::sqrt(s[static_cast<std::size_t>(i)]);
        f.scale(n + i) = 1.0 / f.scale(i);
    }
    return f;
}

std::vector<OracleValues> fock_side(const ScenarioConfig& cfg, const Universe& u,
                                    const std::array<GaussianState, 2>& branches, int cutoff) {
    const int n = u.physical_modes;
    const fock::FockSpace space = n <= 2 ? fock::FockSpace::per_mode(std::vector<int>(static_cast<std::size_t>(n), cutoff))
                                         : fock::FockSpace::total(n, cutoff);
    const AdaptedFrame frame = adapted_frame(cfg, u);
    const Matrix d = frame.scale.asDiagonal();
    const fock::SpectralEvolver evolver(fock::build_fock_hamiltonian(frame.model, space));
    const fock::FockSpace probe_space = fock::FockSpace::per_mode({space.cutoffs()[0]});
    std::array<fock::FockState, 2> psi0;
    for (std::size_t k = 0; k < 2; ++k)
        psi0[k] = fock::gaussian_to_fock(gaussian::evolve(branches[k], d), space);
    const ModeSet first{0};
    const Vector back = frame.scale({0, n}).cwiseInverse();

    std::vector<OracleValues> out(cfg.times.size());
    parallel_for(cfg.times.size(), [&](std::size_t i) {
        const double t = cfg.times[i];
        std::array<fock::FockState, 2> psi{evolver.evolve(psi0[0], t), evolver.evolve(psi0[1], t)};
        const auto rho = fock::reduced_density(psi[0], space, first);
        const auto mom = fock::moments(psi[0], space, first);

        std::array<CVector, 2> conditioned;
        for (std::size_t k = 0; k < 2; ++k) {
            // probe in the adapted frame is the unit-width coherent state
            const Vector m = k == 0 ? mom.mean : fock::moments(psi[k], space, first).mean;
            const auto probe = fock::gaussian_to_fock(gaussian::coherent_state(1, 0, m(0), m(1)), probe_space);
            conditioned[k] = fock::project(psi[k], space, first, [&](std::span<const int> occ) {
                                 return probe.amplitudes(occ[0]);
                             }).amplitudes;
            conditioned[k].normalize();
        }
        out[i] = OracleValues{fock::purity(rho), fock::pure_state_log_negativity(rho),
                              std::min(1.0, std::abs(conditioned[0].dot(conditioned[1]))),
                              back.cwiseProduct(mom.mean), back.asDiagonal() * mom.cov * back.asDiagonal()};
    });
    return out;
}

} // namespace

OracleReport run_oracle_compare(const ScenarioConfig& cfg, const OracleOptions& options) {
    if (cfg.model.bath.size() > 2) throw DomainError("oracle-compare supports at most 2 bath modes");
    if (cfg.initial.particle != ParticleState::Coherent)
        throw DomainError("oracle-compare requires a coherent particle state");
    if (cfg.initial.bath_temperature != 0.0) throw DomainError("oracle-compare requires bath_temperature = 0");
    if (cfg.purified) throw DomainError("oracle-compare does not support purified runs");
    if (options.cutoff < 2 || options.cutoff_step < 1 || options.max_cutoff < options.cutoff + options.cutoff_step)
        throw DomainError("oracle cutoffs must satisfy 2 <= cutoff and cutoff + step <= max_cutoff");

    const Universe u = prepare(cfg);
    const int n = u.physical_modes;
    const ModeSet first{0};
    const ModeSet env = range_modes(1, n);

    // Cat branches: particle at (x0, p0) and (-x0, p0).
    Vector mirrored = u.initial.mean();
    mirrored(0) = -mirrored(0);
    const std::array<GaussianState, 2> branches{u.initial, GaussianState(mirrored, u.initial.cov())};
    const gaussian::CatState cat({{Complex{1.0, 0.0}, branches[0].mean()}, {Complex{1.0, 0.0}, branches[1].mean()}},
                                 u.initial.cov());

    std::vector<OracleValues> gauss(cfg.times.size());
    parallel_for(cfg.times.size(), [&](std::size_t i) {
        const Matrix s = u.propagator(cfg.times[i]);
        const GaussianState st = gaussian::evolve(u.initial, s);
        const GaussianState red = gaussian::reduce(st, first);
        gauss[i] = OracleValues{gaussian::purity(red), gaussian::log_negativity(st, first),
                                gaussian::decoherence_factor(gaussian::evolve(cat, s), env, u.particle_width),
                                red.mean(), red.cov()};
    });

    // Raise the cutoff until one more step changes nothing beyond tolerance.
    int cutoff = options.cutoff;
    std::optional<std::vector<OracleValues>> lower;
    double change = 0.0;
    for (;;) {
        if (!lower) {
            try {
                lower = fock_side(cfg, u, branches, cutoff);
            } catch (const ConditioningError&) {
                lower.reset();
            }
        }
        const int next = cutoff + options.cutoff_step;
        if (next > options.max_cutoff) {
            std::ostringstream os;
            os << "oracle-compare: no cutoff up to " << options.max_cutoff << " converged (last change " << change
               << ")";
            throw ConditioningError(os.str());
        }
        std::optional<std::vector<OracleValues>> upper;
        try {
            upper = fock_side(cfg, u, branches, next);
        } catch (const ConditioningError&) {
            upper.reset();
        }
        if (lower && upper) {
            change = 0.0;
            for (std::size_t i = 0; i < lower->size(); ++i) change = std::max(change, values_diff((*lower)[i], (*upper)[i]));
            if (change < options.convergence_tolerance) break;
        }
        cutoff = next;
        lower = std::move(upper);
    }

    OracleReport report;
    report.certified_cutoff = cutoff;
    report.convergence_change = change;
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
        const auto& g = gauss[i];
        const auto& f = (*lower)[i];
        OracleSample s{cfg.times[i], g.purity, f.purity, g.neg, f.neg, g.decoherence, f.decoherence, moment_diff(g, f),
                       values_diff(g, f)};
        report.max_abs_diff = std::max(report.max_abs_diff, s.max_abs_diff);
        report.samples.push_back(s);
    }
    return report;
}

} // namespace qbm::experiments
