// Scenarios run on the model universe. Each scenario evolves one global state
// in the particle + bath coordinates and reads the alternate structure off the
// same evolved state through its StructureMap.

#pragma once

#include "qbm/gaussian.hpp"
#include "qbm/linalg.hpp"
#include "qbm/model.hpp"
#include "qbm/structure.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qbm::experiments {

// Entanglement below this is treated as absent, above kWitnessThreshold as
// present.
inline constexpr double kSeparableThreshold = 1e-8;
inline constexpr double kWitnessThreshold = 1e-3;

enum class ParticleState { Coherent, Thermal };

struct InitialState {
    ParticleState particle{ParticleState::Coherent};
    double x0{0.0};
    double p0{0.0};
    // Width of the particle's coherent / thermal state: mass m1, this
    // frequency.
    double width_omega{1.0};
    double particle_temperature{0.0};  // Thermal only
    double bath_temperature{0.0};
};

struct ScenarioConfig {
    model::ModelParams model;
    InitialState initial;
    std::vector<double> times{0.0};
    // Purify the initial state; ancillas join the bath side of both
    // structures and have no dynamics.
    bool purified{false};
    structure::RelativeScheme relative_scheme{structure::RelativeScheme::ReferenceParticle};
    // Structure map on the N+1 physical modes. Defaults to the CM + normal-mode
    // composite of structure::alternate_structure.
    std::optional<structure::StructureMap> alternate;

    // Throws DomainError naming the offending field.
    void validate() const;
};

// Everything a scenario needs, built once from a config.
struct Universe {
    model::QuadraticHamiltonian hamiltonian;
    structure::StructureMap map;   // over all modes including ancillas
    gaussian::GaussianState initial;
    int physical_modes;            // N + 1
    int ancillas;
    gaussian::ModeWidth particle_width;

    int total_modes() const { return physical_modes + ancillas; }
    // Global propagator at time t, identity on the ancillas.
    Matrix propagator(double t) const;
};

Universe prepare(const ScenarioConfig& cfg);

// Scales every bath mass and frequency (and m1) by an independent factor
// 1 + amplitude * u, u uniform in [-1, 1), drawn from mt19937_64 seeded with
// `seed`. Couplings are kept.
model::ModelParams perturb(const model::ModelParams& params, double amplitude, std::uint64_t seed);

// Evenly spaced grid of `points` times over [0, t_max].
std::vector<double> uniform_grid(double t_max, int points);

// ---------------------------------------------------------------------------

struct PODSample {
    double t;
    double purity_1;
    double purity_sp;
    double neg_12;
    double neg_spep;
};

struct PODReport {
    std::vector<PODSample> samples;
    // First crossing below (purity(0) + plateau) / 2, plateau = mean over the
    // last 20% of the grid; linear interpolation between samples. Empty when
    // the purity does not decay or never crosses.
    std::optional<double> half_time_1;
    std::optional<double> half_time_sp;
    // Purity rose by more than 1e-6 within the first quarter of the shortest
    // bath period.
    bool early_increase_1{false};
    bool early_increase_sp{false};
    // Purity climbed back by more than 1e-3 above its running minimum later
    // on (finite-bath recurrence).
    bool recurrence_1{false};
    bool recurrence_sp{false};
};

PODReport run_pod(const ScenarioConfig& cfg);

std::optional<double> half_time(const std::vector<double>& t, const std::vector<double>& purity);

// ---------------------------------------------------------------------------

struct ERSample {
    double t;
    double neg_12;
    double neg_spep;
    bool witnessed;  // one below kSeparableThreshold, the other above kWitnessThreshold
};

struct ERReport {
    std::vector<ERSample> samples;
};

// Requires a pure global state (bath at T = 0 or purified).
ERReport run_er_check(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------

struct ExclusivitySample {
    double t;
    double neg_12;    // of the branch proxy, zero by construction
    double neg_spep;  // of the branch proxy
    bool excluding;   // neg_spep > kWitnessThreshold
};

struct ExclusivityReport {
    std::vector<ExclusivitySample> samples;
    double excluding_fraction{0.0};
};

// Branch proxy at time t: the particle coherent state centered at the
// particle's current mean, times the bath state obtained by projecting the
// global state onto it. Requires a pure global state and a coherent particle.
ExclusivityReport run_exclusivity(const ScenarioConfig& cfg);

gaussian::GaussianState branch_proxy(const Universe& u, const gaussian::GaussianState& global);

// ---------------------------------------------------------------------------

struct IncompatibilityReport {
    double t;
    double l1_distance;
    double mean_sp;  // true S' position density
    double var_sp;
    double mean_1;   // particle position density, relabeled
    double var_1;
};

IncompatibilityReport marginal_incompatibility(const ScenarioConfig& cfg, double t);
std::vector<IncompatibilityReport> marginal_incompatibility(const ScenarioConfig& cfg);

// Exact L1 distance between two normal densities.
double gaussian_l1_distance(double mean_a, double var_a, double mean_b, double var_b);

// ---------------------------------------------------------------------------

struct OracleOptions {
    // N = 1: levels per mode. N = 2: maximal total excitation.
    int cutoff{20};
    int cutoff_step{10};
    int max_cutoff{40};
    // Largest change of any compared Fock quantity between cutoff and
    // cutoff + step that certifies convergence.
    double convergence_tolerance{1e-8};
};

struct OracleSample {
    double t;
    double purity_gauss;
    double purity_fock;
    double neg_gauss;
    double neg_fock;
    double decoherence_gauss;
    double decoherence_fock;
    double moment_diff;   // max |difference| over particle mean and covariance
    double max_abs_diff;  // over purity, decoherence and moments
};

struct OracleReport {
    std::vector<OracleSample> samples;
    int certified_cutoff{0};
    double convergence_change{0.0};
    double max_abs_diff{0.0};
};

// Compares the Gaussian machinery with the truncated Fock oracle for N <= 2,
// a coherent particle, and a T = 0 bath. The second cat branch sits at
// (-x0, p0). Throws ConditioningError when no cutoff up to max_cutoff
// converges.
OracleReport run_oracle_compare(const ScenarioConfig& cfg, const OracleOptions& options = {});

// ---------------------------------------------------------------------------

// Worker threads for time-grid loops: QBM_NUM_THREADS if set, otherwise the
// available hardware parallelism.
int thread_count();

} // namespace qbm::experiments
