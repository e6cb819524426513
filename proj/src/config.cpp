#include "qbm/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>

namespace qbm::config {

namespace {

struct Entry {
    std::string value;
    int line;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"", {"scenario", "seed", "output"}},
        {"model", {"m1", "potential", "omega", "coupling_sign", "relative_scheme"}},
        {"bath",
         {"modes", "gamma", "cutoff", "grid", "mass", "masses", "frequencies", "couplings", "perturbation", "temperature",
          "purified"}},
        {"initial", {"particle", "x0", "p0", "width_omega", "temperature"}},
        {"time", {"t_max", "points"}},
        {"oracle", {"cutoff", "cutoff_step", "max_cutoff", "tolerance"}},
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string qualified(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

class Table {
public:
    void set(const std::string& section, const std::string& key, std::string value, int line) {
        const auto sec = known_keys().find(section);
        if (sec == known_keys().end()) throw ParseError(line, "unknown section [" + section + "]");
        if (!sec->second.contains(key)) throw ParseError(line, "unknown key \"" + key + "\"" +
                                                                    (section.empty() ? "" : " in section [" + section + "]"));
        const std::string name = qualified(section, key);
        if (line > 0 && entries_.contains(name) && entries_.at(name).line > 0)
            throw ParseError(line, "duplicate key \"" + name + "\" (first set on line " +
                                       std::to_string(entries_.at(name).line) + ")");
        entries_[name] = Entry{std::move(value), line};
    }

    const Entry* find(const std::string& name) const {
        const auto it = entries_.find(name);
        return it == entries_.end() ? nullptr : &it->second;
    }

    bool has(const std::string& name) const { return entries_.contains(name); }

private:
    std::map<std::string, Entry> entries_;
};

ParseError value_error(const std::string& name, const Entry& e, const std::string& expected) {
    return ParseError(e.line, "invalid value \"" + e.value + "\" for " + name + ": expected " + expected);
}

std::optional<double> get_double(const Table& t, const std::string& name) {
    const Entry* e = t.find(name);
    if (!e) return std::nullopt;
    double v = 0.0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) throw value_error(name, *e, "a finite number");
    return v;
}

std::optional<long long> get_int(const Table& t, const std::string& name) {
    const Entry* e = t.find(name);
    if (!e) return std::nullopt;
    long long v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw value_error(name, *e, "an integer");
    return v;
}

std::optional<std::string> get_choice(const Table& t, const std::string& name, const std::set<std::string>& options) {
    const Entry* e = t.find(name);
    if (!e) return std::nullopt;
    if (!options.contains(e->value)) {
        std::string list;
        for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
        throw value_error(name, *e, "one of " + list);
    }
    return e->value;
}

std::optional<std::vector<double>> get_list(const Table& t, const std::string& name) {
    const Entry* e = t.find(name);
    if (!e) return std::nullopt;
    std::vector<double> out;
    std::string_view rest = e->value;
    while (true) {
        const auto comma = rest.find(',');
        const std::string item = trim(rest.substr(0, comma));
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(v))
            throw value_error(name, *e, "a comma-separated list of finite numbers");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

bool get_bool(const Table& t, const std::string& name, bool fallback) {
    const auto v = get_choice(t, name, {"true", "false"});
    return v ? *v == "true" : fallback;
}

} // namespace

ParseError::ParseError(int line, const std::string& what)
    : DomainError(line > 0 ? "line " + std::to_string(line) + ": " + what : "override: " + what), line_(line) {}

const char* scenario_name(Scenario s) {
    switch (s) {
    case Scenario::Pod: return "pod";
    case Scenario::Er: return "er";
    case Scenario::Exclusivity: return "exclusivity";
    case Scenario::Marginal: return "marginal";
    case Scenario::OracleCompare: return "oracle-compare";
    }
    return "?";
}

RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
    Table table;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known_keys().contains(section) || section.empty())
                throw ParseError(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected \"key = value\"");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "missing key before '='");
        if (value.empty()) throw ParseError(line_no, "missing value for \"" + key + "\"");
        table.set(section, key, value, line_no);
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ParseError(0, "expected key=value, got \"" + o + "\"");
        const std::string name = trim(std::string_view(o).substr(0, eq));
        const std::string value = trim(std::string_view(o).substr(eq + 1));
        const auto dot = name.find('.');
        const std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
        const std::string key = dot == std::string::npos ? name : name.substr(dot + 1);
        if (value.empty()) throw ParseError(0, "missing value for \"" + name + "\"");
        table.set(sec, key, value, 0);
    }

    RunConfig cfg;
    if (const auto s = get_choice(table, "scenario", {"pod", "er", "exclusivity", "marginal", "oracle-compare"})) {
        const std::map<std::string, Scenario> by_name{{"pod", Scenario::Pod},
                                                      {"er", Scenario::Er},
                                                      {"exclusivity", Scenario::Exclusivity},
                                                      {"marginal", Scenario::Marginal},
                                                      {"oracle-compare", Scenario::OracleCompare}};
        cfg.scenario = by_name.at(*s);
    } else {
        throw DomainError("scenario is required");
    }
    if (const auto seed = get_int(table, "seed")) {
        if (*seed < 0) throw DomainError("seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(*seed);
    }
    if (const Entry* e = table.find("output")) cfg.output_path = e->value;

    // [model]
    model::ModelParams params;
    params.m1 = get_double(table, "model.m1").value_or(1.0);
    const std::string potential = get_choice(table, "model.potential", {"free", "harmonic"}).value_or("harmonic");
    if (potential == "free") {
        if (table.has("model.omega")) throw DomainError("model.omega is only valid with potential = harmonic");
        params.potential = model::FreePotential{};
    } else {
        params.potential = model::HarmonicPotential{get_double(table, "model.omega").value_or(1.0)};
    }
    params.coupling_sign = get_choice(table, "model.coupling_sign", {"plus", "minus"}).value_or("plus") == "plus"
                               ? model::CouplingSign::Plus
                               : model::CouplingSign::Minus;
    auto& sc = cfg.scenario_config;
    sc.relative_scheme =
        get_choice(table, "model.relative_scheme", {"reference", "jacobi"}).value_or("reference") == "reference"
            ? structure::RelativeScheme::ReferenceParticle
            : structure::RelativeScheme::Jacobi;

    // [bath]: either an Ohmic discretization or explicit mode lists
    const auto freqs = get_list(table, "bath.frequencies");
    if (freqs) {
        for (const char* k : {"bath.modes", "bath.gamma", "bath.cutoff", "bath.grid", "bath.mass"})
            if (table.has(k)) throw DomainError(std::string(k) + " cannot be combined with bath.frequencies");
        const auto couplings = get_list(table, "bath.couplings");
        if (!couplings) throw DomainError("bath.couplings is required with bath.frequencies");
        const auto masses = get_list(table, "bath.masses").value_or(std::vector<double>(freqs->size(), 1.0));
        if (couplings->size() != freqs->size() || masses.size() != freqs->size())
            throw DomainError("bath.masses, bath.frequencies and bath.couplings must have equal lengths");
        for (std::size_t i = 0; i < freqs->size(); ++i) params.bath.push_back({masses[i], (*freqs)[i], (*couplings)[i]});
    } else {
        for (const char* k : {"bath.masses", "bath.couplings"})
            if (table.has(k)) throw DomainError(std::string(k) + " requires bath.frequencies");
        model::BathSpec spec;
        const auto modes = get_int(table, "bath.modes").value_or(1);
        if (modes < 1 || modes > 100000) throw DomainError("bath.modes must be >= 1");
        spec.n_modes = static_cast<int>(modes);
        spec.gamma = get_double(table, "bath.gamma").value_or(0.0);
        spec.cutoff = get_double(table, "bath.cutoff").value_or(1.0);
        spec.scheme = get_choice(table, "bath.grid", {"linear", "log"}).value_or("linear") == "linear"
                          ? model::GridScheme::Linear
                          : model::GridScheme::Log;
        try {
            spec.validate();
        } catch (const DomainError& e) {
            throw DomainError(std::string("bath.") + e.what());
        }
        params.bath = model::discretize_bath(spec, get_double(table, "bath.mass").value_or(1.0));
    }
    cfg.perturbation = get_double(table, "bath.perturbation").value_or(0.0);
    if (!(cfg.perturbation >= 0.0 && cfg.perturbation < 1.0)) throw DomainError("bath.perturbation must be in [0, 1)");
    params.validate();
    sc.model = cfg.perturbation > 0.0 ? experiments::perturb(params, cfg.perturbation, cfg.seed) : params;
    sc.purified = get_bool(table, "bath.purified", false);

    // [initial]
    auto& init = sc.initial;
    init.particle = get_choice(table, "initial.particle", {"coherent", "thermal"}).value_or("coherent") == "coherent"
                        ? experiments::ParticleState::Coherent
                        : experiments::ParticleState::Thermal;
    init.x0 = get_double(table, "initial.x0").value_or(0.0);
    init.p0 = get_double(table, "initial.p0").value_or(0.0);
    const double default_width = std::holds_alternative<model::HarmonicPotential>(params.potential)
                                     ? std::get<model::HarmonicPotential>(params.potential).omega
                                     : 1.0;
    init.width_omega = get_double(table, "initial.width_omega").value_or(default_width);
    init.particle_temperature = get_double(table, "initial.temperature").value_or(0.0);
    if (init.particle == experiments::ParticleState::Coherent && table.has("initial.temperature"))
        throw DomainError("initial.temperature is only valid with particle = thermal");
    init.bath_temperature = get_double(table, "bath.temperature").value_or(0.0);

    // [time]
    const double t_max = get_double(table, "time.t_max").value_or(10.0);
    const auto points = get_int(table, "time.points").value_or(50);
    if (points < 1 || points > 1000000) throw DomainError("time.points must be in [1, 1000000]");
    if (!(t_max > 0.0)) throw DomainError("time.t_max must be positive");
    sc.times = experiments::uniform_grid(t_max, static_cast<int>(points));

    // [oracle]
    auto& oc = cfg.oracle;
    oc.cutoff = static_cast<int>(get_int(table, "oracle.cutoff").value_or(oc.cutoff));
    oc.cutoff_step = static_cast<int>(get_int(table, "oracle.cutoff_step").value_or(oc.cutoff_step));
    oc.max_cutoff = static_cast<int>(get_int(table, "oracle.max_cutoff").value_or(oc.max_cutoff));
    oc.convergence_tolerance = get_double(table, "oracle.tolerance").value_or(oc.convergence_tolerance);
    if (oc.cutoff < 2) throw DomainError("oracle.cutoff must be >= 2");
    if (oc.cutoff_step < 1) throw DomainError("oracle.cutoff_step must be >= 1");
    if (oc.max_cutoff < oc.cutoff + oc.cutoff_step) throw DomainError("oracle.max_cutoff must be >= cutoff + cutoff_step");
    if (!(oc.convergence_tolerance > 0.0)) throw DomainError("oracle.tolerance must be positive");

    try {
        sc.validate();
    } catch (const DomainError& e) {
        throw DomainError(std::string("invalid scenario: ") + e.what());
    }
    return cfg;
}

} // namespace qbm::config
