#include "driftlab/config.hpp"

#include "driftlab/error.hpp"
#include "driftlab/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace driftlab {

namespace {

using json = nlohmann::ordered_json;

constexpr double kTwoPi = 2 * std::numbers::pi;

[[noreturn]] void fail(const std::string& key, const std::string& msg)
{
    throw ConfigError(key + ": " + msg);
}

/// Reads an object block, rejecting keys outside `allowed`.
class Block {
public:
    Block(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail(path_.empty() ? "<root>" : path_, "expected an object");
        for (const auto& [k, v] : j_.items())
            if (!allowed.contains(k))
                fail(key(k), "unknown key");
    }

    bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
    const json& at(const std::string& k) const { return j_.at(k); }
    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    double number(const std::string& k, double def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_number())
            fail(key(k), "expected a number");
        return at(k).get<double>();
    }
    int integer(const std::string& k, int def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_number_integer())
            fail(key(k), "expected an integer");
        const auto v = at(k).get<long long>();
        if (v < -1000000000LL || v > 1000000000LL)
            fail(key(k), "out of range");
        return static_cast<int>(v);
    }
    std::uint64_t u64(const std::string& k, std::uint64_t def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_number_unsigned())
            fail(key(k), "expected a non-negative integer");
        return at(k).get<std::uint64_t>();
    }
    std::string text(const std::string& k, const std::string& def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_string())
            fail(key(k), "expected a string");
        return at(k).get<std::string>();
    }
    std::vector<double> numbers(const std::string& k, std::vector<double> def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_array())
            fail(key(k), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& v : at(k)) {
            if (!v.is_number())
                fail(key(k), "expected an array of numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    std::vector<std::string> strings(const std::string& k, std::vector<std::string> def) const
    {
        if (!has(k))
            return def;
        if (!at(k).is_array())
            fail(key(k), "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& v : at(k)) {
            if (!v.is_string())
                fail(key(k), "expected an array of strings");
            out.push_back(v.get<std::string>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

const json& child(const Block& b, const std::string& k)
{
    static const json empty = json::object();
    return b.has(k) ? b.at(k) : empty;
}

const std::set<std::string> kStudyKinds{"rate", "bvm", "invariant", "coverage", "delta", "ergodic", "isometry"};

std::string family_name(Family f)
{
    return f == Family::Haar ? "haar" : "daubechies";
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir)
{
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    RunConfig cfg;
    cfg.base_dir = base_dir;
    const Block top(root, "", {"model", "discretization", "basis", "solver", "study"});

    const Block model(child(top, "model"), "model", {"d", "drift", "x0"});
    cfg.model.d = model.integer("d", cfg.model.d);
    const Block drift(child(model, "drift"), "model.drift", {"preset", "amplitude", "file"});
    cfg.model.drift.preset = drift.text("preset", cfg.model.drift.preset);
    cfg.model.drift.amplitude = drift.number("amplitude", cfg.model.drift.amplitude);
    cfg.model.drift.file = drift.text("file", "");
    const auto x0 = model.numbers("x0", {});
    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != cfg.model.d)
            fail("model.x0", "needs " + std::to_string(cfg.model.d) + " entries");
        for (std::size_t k = 0; k < x0.size(); ++k)
            cfg.model.x0[k] = x0[k];
    }

    const Block disc(child(top, "discretization"), "discretization", {"T", "delta", "seed"});
    cfg.discretization.T = disc.number("T", cfg.discretization.T);
    cfg.discretization.delta = disc.number("delta", cfg.discretization.delta);
    cfg.discretization.seed = disc.u64("seed", cfg.discretization.seed);

    const Block basis(child(top, "basis"), "basis", {"family", "S", "J", "alpha", "a", "cascade_depth"});
    const std::string fam = basis.text("family", family_name(cfg.basis.family));
    if (fam == "haar")
        cfg.basis.family = Family::Haar;
    else if (fam == "daubechies")
        cfg.basis.family = Family::Daubechies;
    else
        fail("basis.family", "expected \"haar\" or \"daubechies\", got \"" + fam + "\"");
    cfg.basis.S = basis.integer("S", cfg.basis.S);
    if (basis.has("J"))
        cfg.basis.J = basis.integer("J", 0);
    cfg.basis.alpha = basis.number("alpha", cfg.basis.alpha);
    cfg.basis.a = basis.number("a", cfg.basis.a);
    cfg.basis.cascade_depth = basis.integer("cascade_depth", cfg.basis.cascade_depth);

    const Block solver(child(top, "solver"), "solver", {"K", "oversample"});
    cfg.solver.K = solver.integer("K", default_solver_K(cfg.model.d));
    cfg.solver.oversample = solver.integer("oversample", cfg.solver.oversample);

    if (top.has("study")) {
        const Block st(top.at("study"), "study",
                       {"kind", "horizons", "replications", "smoothness", "norm", "functionals", "coordinate",
                        "test_function", "draws", "level", "band_draws", "scales", "direction"});
        StudyBlock s;
        s.kind = st.text("kind", s.kind);
        s.horizons = st.numbers("horizons", s.horizons);
        s.replications = st.integer("replications", s.replications);
        if (st.has("smoothness"))
            s.smoothness = st.number("smoothness", 0.0);
        s.norm = st.text("norm", s.norm);
        s.functionals = st.strings("functionals", s.functionals);
        s.coordinate = st.integer("coordinate", s.coordinate);
        s.test_function = st.text("test_function", s.test_function);
        s.draws = st.integer("draws", s.draws);
        s.level = st.number("level", s.level);
        s.band_draws = st.integer("band_draws", s.band_draws);
        s.scales = st.numbers("scales", s.scales);
        s.direction = st.text("direction", s.direction);
        cfg.study = s;
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const
{
    const int d = model.d;
    if (d < 1 || d > kMaxDim)
        fail("model.d", "must be 1, 2 or 3");
    if (model.drift.file.empty()) {
        // checked again when resolved; here only the name
        bool known = false;
        for (const auto& n : drift_preset_names())
            known = known || n == model.drift.preset;
        if (!known)
            fail("model.drift.preset", "unknown preset \"" + model.drift.preset + "\"");
        if (model.drift.preset == "divfree_perturbed" && d < 2)
            fail("model.drift.preset", "divfree_perturbed needs d >= 2");
    }
    if (!std::isfinite(model.drift.amplitude))
        fail("model.drift.amplitude", "must be finite");
    for (int k = 0; k < d; ++k)
        if (!std::isfinite(model.x0[k]))
            fail("model.x0", "must be finite");
    if (!(discretization.T > 0.0) || !std::isfinite(discretization.T))
        fail("discretization.T", "must be positive");
    if (!(discretization.delta > 0.0) || !std::isfinite(discretization.delta))
        fail("discretization.delta", "must be positive");
    try {
        step_count(discretization.T, discretization.delta);
    } catch (const ConfigError&) {
        fail("discretization.T", "must be an integer multiple of discretization.delta");
    }
    if (basis.family == Family::Daubechies && (basis.S < 2 || basis.S > kMaxVanishingMoments))
        fail("basis.S", "must be in [2,10]");
    if (basis.J && (*basis.J < 0 || *basis.J * d > 24))
        fail("basis.J", "must be in [0, 24/d]");
    if (!(basis.alpha >= 0.0) || !std::isfinite(basis.alpha))
        fail("basis.alpha", "must be >= 0");
    if (!(basis.a > 0.0) || !std::isfinite(basis.a))
        fail("basis.a", "must be > 0");
    if (basis.cascade_depth < 1 || basis.cascade_depth > 20)
        fail("basis.cascade_depth", "must be in [1,20]");
    if (!basis.J && !(discretization.T > 1.0))
        fail("discretization.T", "must exceed 1 when basis.J is derived from T");
    if (solver.K < 1 || solver.K > 1024)
        fail("solver.K", "must be in [1,1024]");
    if (solver.oversample < 3 || solver.oversample > 16)
        fail("solver.oversample", "must be in [3,16]");
    if (study) {
        const StudyBlock& s = *study;
        if (!kStudyKinds.contains(s.kind))
            fail("study.kind", "unknown study \"" + s.kind + "\"");
        if (s.horizons.empty())
            fail("study.horizons", "must not be empty");
        for (std::size_t i = 0; i < s.horizons.size(); ++i) {
            if (!(s.horizons[i] > 1.0) || !std::isfinite(s.horizons[i]))
                fail("study.horizons", "entries must be finite and > 1");
            if (i > 0 && !(s.horizons[i] > s.horizons[i - 1]))
                fail("study.horizons", "must be strictly increasing");
        }
        if (s.replications < 1)
            fail("study.replications", "must be >= 1");
        if (s.smoothness && !(*s.smoothness > 0.0))
            fail("study.smoothness", "must be > 0");
        if (s.norm != "l2" && s.norm != "sup")
            fail("study.norm", "expected \"l2\" or \"sup\"");
        if (s.coordinate < 0 || s.coordinate >= d)
            fail("study.coordinate", "must be in [0, d)");
        if (s.draws < 2)
            fail("study.draws", "must be >= 2");
        if (!(s.level > 0.0 && s.level < 1.0))
            fail("study.level", "must be in (0,1)");
        if (s.band_draws < 0)
            fail("study.band_draws", "must be >= 0");
        for (const auto& f : s.functionals)
            try {
                named_test_function(f, d);
            } catch (const ConfigError& e) {
                fail("study.functionals", e.what());
            }
        try {
            named_test_function(s.test_function, d);
        } catch (const ConfigError& e) {
            fail("study.test_function", e.what());
        }
        try {
            named_test_function(s.direction, d);
        } catch (const ConfigError& e) {
            fail("study.direction", e.what());
        }
    }
}

void apply_seed_override(RunConfig& cfg)
{
    const char* env = std::getenv("DRIFTLAB_SEED");
    if (!env)
        return;
    const std::string s(env);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used, 10);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || s[0] == '-')
        throw ConfigError("DRIFTLAB_SEED: expected a non-negative integer, got \"" + s + "\"");
    cfg.discretization.seed = v;
}

RunConfig load_config(const std::string& file)
{
    std::ifstream in(file);
    if (!in)
        throw IoError("cannot open config " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(file).parent_path();
    RunConfig cfg = parse_config(ss.str(), dir.empty() ? "." : dir.string());
    apply_seed_override(cfg);
    return cfg;
}

std::string resolved_config(const RunConfig& cfg)
{
    json j;
    json x0 = json::array();
    for (int k = 0; k < cfg.model.d; ++k)
        x0.push_back(cfg.model.x0[k]);
    json drift{{"preset", cfg.model.drift.preset}, {"amplitude", cfg.model.drift.amplitude}};
    if (!cfg.model.drift.file.empty())
        drift["file"] = cfg.model.drift.file;
    j["model"] = {{"d", cfg.model.d}, {"drift", drift}, {"x0", x0}};
    j["discretization"] = {
        {"T", cfg.discretization.T}, {"delta", cfg.discretization.delta}, {"seed", cfg.discretization.seed}};
    j["basis"] = {{"family", family_name(cfg.basis.family)},
                  {"S", cfg.basis.S},
                  {"J", cfg.basis.J ? json(*cfg.basis.J) : json(nullptr)},
                  {"alpha", cfg.basis.alpha},
                  {"a", cfg.basis.a},
                  {"cascade_depth", cfg.basis.cascade_depth}};
    j["solver"] = {{"K", cfg.solver.K}, {"oversample", cfg.solver.oversample}};
    if (cfg.study) {
        const StudyBlock& s = *cfg.study;
        j["study"] = {{"kind", s.kind},
                      {"horizons", s.horizons},
                      {"replications", s.replications},
                      {"smoothness", s.smoothness ? json(*s.smoothness) : json(nullptr)},
                      {"norm", s.norm},
                      {"functionals", s.functionals},
                      {"coordinate", s.coordinate},
                      {"test_function", s.test_function},
                      {"draws", s.draws},
                      {"level", s.level},
                      {"band_draws", s.band_draws},
                      {"scales", s.scales},
                      {"direction", s.direction}};
    }
    return j.dump(2) + "\n";
}

DriftModel resolve_drift(const RunConfig& cfg)
{
    if (!cfg.model.drift.file.empty()) {
        std::filesystem::path p(cfg.model.drift.file);
        if (p.is_relative())
            p = std::filesystem::path(cfg.base_dir) / p;
        const CoefficientField c = load_coefficients(p.string());
        if (c.spec().dim() != cfg.model.d)
            fail("model.drift.file", "coefficient dimension does not match model.d");
        return drift_from_coefficients(c);
    }
    return drift_preset(cfg.model.drift.preset, cfg.model.d, cfg.model.drift.amplitude);
}

PriorSpec prior_for(const RunConfig& cfg, double T)
{
    if (cfg.basis.J) {
        PriorSpec p{cfg.basis.alpha, cfg.basis.a, *cfg.basis.J, cfg.model.d};
        p.validate();
        return p;
    }
    return PriorSpec::from_horizon(cfg.basis.alpha, cfg.basis.a, T, cfg.model.d);
}

BasisSpec basis_for(const RunConfig& cfg, double T)
{
    return build_basis(cfg.basis.family, prior_for(cfg, T).level, cfg.model.d, cfg.basis.S, cfg.basis.cascade_depth);
}

StudyConfig study_config(const RunConfig& cfg)
{
    StudyConfig s;
    s.dim = cfg.model.d;
    s.truth = resolve_drift(cfg);
    s.alpha = cfg.basis.alpha;
    s.a = cfg.basis.a;
    s.level = cfg.basis.J;
    s.seed = cfg.discretization.seed;
    s.family = cfg.basis.family;
    s.vanishing_moments = cfg.basis.S;
    s.delta = cfg.discretization.delta;
    s.x0 = cfg.model.x0;
    s.K = cfg.solver.K;
    s.oversample = cfg.solver.oversample;
    if (cfg.study) {
        s.horizons = cfg.study->horizons;
        s.replications = cfg.study->replications;
        if (cfg.study->smoothness)
            s.smoothness = *cfg.study->smoothness;
    } else {
        s.horizons = {cfg.discretization.T};
        s.replications = 1;
    }
    return s;
}

TestFunction named_test_function(const std::string& name, int d)
{
    std::string base = name;
    int axis = 0;
    if (const auto colon = name.find(':'); colon != std::string::npos) {
        base = name.substr(0, colon);
        const std::string ax = name.substr(colon + 1);
        if (ax.size() != 1 || ax[0] < '0' || ax[0] > '2')
            throw ConfigError("test function axis must be 0, 1 or 2 in \"" + name + "\"");
        axis = ax[0] - '0';
    }
    if (axis >= d)
        throw ConfigError("test function axis " + std::to_string(axis) + " exceeds d in \"" + name + "\"");
    ScalarField f{d, {}};
    if (base == "cos")
        f.fn = [axis](const Point& x) { return std::cos(kTwoPi * x[axis]); };
    else if (base == "sin")
        f.fn = [axis](const Point& x) { return std::sin(kTwoPi * x[axis]); };
    else if (base == "cos2")
        f.fn = [axis](const Point& x) { return std::cos(2 * kTwoPi * x[axis]); };
    else if (base == "sin2")
        f.fn = [axis](const Point& x) { return std::sin(2 * kTwoPi * x[axis]); };
    else if (base == "one")
        f.fn = [](const Point&) { return 1.0; };
    else if (base == "zero")
        f.fn = [](const Point&) { return 0.0; };
    else
        throw ConfigError("unknown test function \"" + name + "\" (cos, sin, cos2, sin2, one, zero)");
    return {name, f};
}

} // namespace driftlab
