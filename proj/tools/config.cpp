#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace rwdre::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Re-raises a validation error from the library under the JSON path it came from.
[[noreturn]] void rethrow_under(const std::string& prefix, const ConfigError& e) {
    std::string message = e.what();
    if (!e.path().empty() && message.rfind(e.path() + ": ", 0) == 0) message = message.substr(e.path().size() + 2);
    throw ConfigError(e.path().empty() ? prefix : join(prefix, e.path()), message);
}

template <class Fn>
void validated(const std::string& prefix, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        rethrow_under(prefix, e);
    }
}

const char* type_name(const Json& j) { return j.type_name(); }

// Reads the members of one JSON object and rejects the ones nobody asked for.
class Fields {
public:
    Fields(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_, std::string("expected an object, got ") + type_name(j));
    }

    bool has(const std::string& key) const { return j_->contains(key); }
    std::string path(const std::string& key) const { return join(path_, key); }

    const Json& sub(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) throw ConfigError(path(key), "required field is missing");
        return j_->at(key);
    }

    template <class T>
    T require(const std::string& key) {
        return convert<T>(sub(key), path(key));
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        return convert<T>(j_->at(key), path(key));
    }

    void finish() const {
        for (const auto& item : j_->items()) {
            if (!seen_.count(item.key())) throw ConfigError(path(item.key()), "unknown key");
        }
    }

    template <class T>
    static T convert(const Json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(where, std::string("expected a boolean, got ") + type_name(v));
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where, std::string("expected a string, got ") + type_name(v));
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(where, std::string("expected a number, got ") + type_name(v));
            return v.get<double>();
        } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
                throw ConfigError(where, std::string("expected a non-negative integer, got ") + v.dump());
            }
            return static_cast<T>(v.get<std::uint64_t>());
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(where, std::string("expected an integer, got ") + v.dump());
            return static_cast<T>(v.get<std::int64_t>());
        } else {
            static_assert(sizeof(T) == 0, "unsupported field type");
        }
    }

private:
    const Json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class T>
std::vector<T> list_of(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, std::string("expected an array, got ") + type_name(j));
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(Fields::convert<T>(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// A rate table is either a full array indexed by patch, or an object keyed by
// the decimal patch value; both must cover every patch.
std::vector<double> parse_table(const Json& j, std::size_t size, const std::string& path) {
    if (j.is_array()) {
        auto values = list_of<double>(j, path);
        if (values.size() != size) {
            throw ConfigError(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(values.size()));
        }
        return values;
    }
    if (!j.is_object()) throw ConfigError(path, std::string("expected an array or an object, got ") + type_name(j));
    std::vector<double> values(size, 0.0);
    std::vector<bool> given(size, false);
    for (const auto& item : j.items()) {
        const std::string where = path + "." + item.key();
        std::size_t index = 0;
        std::size_t used = 0;
        try {
            index = std::stoul(item.key(), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.key().size() || item.key().empty()) throw ConfigError(where, "keys must be decimal patch values");
        if (index >= size) throw ConfigError(where, "patch value out of range");
        values[index] = Fields::convert<double>(item.value(), where);
        given[index] = true;
    }
    for (std::size_t i = 0; i < size; ++i) {
        if (!given[i]) throw ConfigError(path + "." + std::to_string(i), "missing table entry");
    }
    return values;
}

PatternModel parse_pattern(Fields& f) {
    PatternModel m;
    const auto motif = list_of<std::int64_t>(f.sub("motif"), f.path("motif"));
    for (std::size_t i = 0; i < motif.size(); ++i) {
        if (motif[i] != 0 && motif[i] != 1) {
            throw ConfigError(f.path("motif") + "[" + std::to_string(i) + "]", "motif entries must be 0 or 1");
        }
        m.motif.push_back(static_cast<std::uint8_t>(motif[i]));
    }
    m.q = list_of<double>(f.sub("q"), f.path("q"));
    return m;
}

InitialLaw parse_init(const Json* j, const RateSpec& spec, const std::string& path) {
    if (!j) return InitialLaw::default_for(spec, true);
    Fields f(*j, path);
    const std::string kind = f.get<std::string>("kind", "default");
    const bool trap = f.get<bool>("trap_conditioned", true);
    InitialLaw law = InitialLaw::default_for(spec, trap);
    if (kind == "product") {
        law.kind = InitialKind::product;
        law.t_burn = 0.0;
    } else if (kind == "equilibrium_burnin") {
        law.kind = InitialKind::equilibrium_burnin;
    } else if (kind != "default") {
        throw ConfigError(f.path("kind"), "expected default, product or equilibrium_burnin, got " + kind);
    }
    law.rho = f.get<double>("rho", law.rho);
    law.t_burn = f.get<double>("t_burn", law.t_burn);
    f.finish();
    validated(path, [&] { law.validate(); });
    return law;
}

ConeSpec parse_cone(const Json* j, ConeSpec fallback, const std::string& path) {
    if (!j) return fallback;
    Fields f(*j, path);
    ConeSpec c;
    c.m = f.get<double>("m", fallback.m);
    c.R = f.get<double>("R", fallback.R);
    f.finish();
    if (c.m < 0.0) throw ConfigError(join(path, "m"), "must be >= 0 (0 selects the default slope)");
    if (c.R < 0.0) throw ConfigError(join(path, "R"), "must be >= 0");
    return c;
}

const Json* optional_sub(Fields& f, const std::string& key) { return f.has(key) ? &f.sub(key) : nullptr; }

}  // namespace

RateSpec parse_rate_spec(const Json& j, const std::string& path) {
    Fields f(j, path);
    RateSpec spec;
    spec.c0 = f.require<double>("c0");
    spec.c1 = f.require<double>("c1");
    spec.lambda0 = f.get<double>("lambda0", 0.0);
    spec.lambda1 = f.get<double>("lambda1", 0.0);
    spec.range = f.get<int>("range", 0);
    if (spec.range < 0 || spec.range > 15) throw ConfigError(f.path("range"), "must lie in [0, 15]");
    const std::size_t size = spec.patch_count();
    for (auto [key, rate, table] : {std::tuple{"p0_table", spec.lambda0, &spec.p0}, std::tuple{"p1_table", spec.lambda1, &spec.p1}}) {
        if (f.has(key)) {
            *table = parse_table(f.sub(key), size, f.path(key));
        } else if (rate == 0.0) {
            table->assign(size, 0.0);
        } else {
            throw ConfigError(f.path(key), "required when the matching lambda is positive");
        }
    }
    f.finish();
    validated(path, [&] { spec.validate(); });
    return spec;
}

ModelSpec parse_model(const Json& j, const std::string& path) {
    Fields f(j, path);
    const std::string kind = f.require<std::string>("kind");
    ModelSpec model;
    if (kind == "infty_zero") {
        model.kind = InftyZero{};
    } else if (kind == "alpha_beta") {
        model.kind = AlphaBeta{f.require<double>("alpha"), f.require<double>("beta")};
    } else if (kind == "pattern") {
        model.kind = parse_pattern(f);
    } else if (kind == "internal_noise") {
        InternalNoise m;
        m.radius = f.require<int>("radius");
        m.offsets = list_of<Site>(f.sub("offsets"), f.path("offsets"));
        const Json& rates = f.sub("rates");
        if (!rates.is_array()) throw ConfigError(f.path("rates"), "expected an array of tables");
        const std::size_t size = std::size_t{1} << (2 * std::max(0, std::min(m.radius, 10)) + 1);
        for (std::size_t i = 0; i < rates.size(); ++i) {
            m.rates.push_back(parse_table(rates[i], size, f.path("rates") + "[" + std::to_string(i) + "]"));
        }
        model.kind = std::move(m);
    } else if (kind == "pattern_extra_jumps") {
        PatternExtraJumps m;
        Fields inner(f.sub("pattern"), f.path("pattern"));
        m.pattern = parse_pattern(inner);
        inner.finish();
        m.rate = f.require<double>("rate");
        m.right_probability = f.get<double>("right_probability", 0.5);
        model.kind = std::move(m);
    } else if (kind == "mixture") {
        Mixture m;
        m.first = std::make_shared<const ModelSpec>(parse_model(f.sub("first"), f.path("first")));
        m.second = std::make_shared<const ModelSpec>(parse_model(f.sub("second"), f.path("second")));
        m.p = f.require<double>("p");
        model.kind = std::move(m);
    } else {
        throw ConfigError(f.path("kind"), "unknown model kind " + kind);
    }
    f.finish();
    validated(path, [&] { model.validate(); });
    return model;
}

ExperimentConfig parse_config(Json document, const Overrides& overrides) {
    if (!document.is_object()) throw ConfigError("", "configuration must be a JSON object");
    if (overrides.seed) document["seed"] = *overrides.seed;
    if (overrides.replicas) document["replicas"] = *overrides.replicas;
    if (overrides.horizon) document["horizon"] = *overrides.horizon;
    if (overrides.threads) document["threads"] = *overrides.threads;

    ExperimentConfig c;
    Fields f(document, "");
    const int version = f.require<int>("schema_version");
    if (version != kSchemaVersion) {
        throw ConfigError("schema_version", "unsupported version " + std::to_string(version) + ", expected " +
                                                std::to_string(kSchemaVersion));
    }
    c.name = f.get<std::string>("name", "");
    c.seed = f.require<std::uint64_t>("seed");
    c.replicas = f.require<std::size_t>("replicas");
    if (c.replicas == 0) throw ConfigError("replicas", "must be at least 1");
    c.horizon = f.require<double>("horizon");
    if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) throw ConfigError("horizon", "must be positive and finite");
    c.threads = f.get<unsigned>("threads", 1u);
    if (c.threads == 0) throw ConfigError("threads", "must be at least 1");

    c.setup.env = parse_rate_spec(f.sub("env"), "env");
    c.setup.model = f.has("model") ? parse_model(f.sub("model"), "model") : ModelSpec{InftyZero{}};
    c.setup.init = parse_init(optional_sub(f, "init"), c.setup.env, "init");
    const std::string boundary = f.get<std::string>("boundary", "frozen-resample");
    try {
        c.setup.boundary = boundary_kind_from_string(boundary);
    } catch (const Error&) {
        throw ConfigError("boundary", "expected frozen-resample or periodic, got " + boundary);
    }
    if (const Json* w = optional_sub(f, "window")) {
        Fields wf(*w, "window");
        c.setup.window = WindowBounds{wf.require<Site>("lo"), wf.require<Site>("hi")};
        wf.finish();
    }
    c.setup.force_window = f.get<bool>("force_window", false);
    validated("", [&] { c.setup.validate(); });

    const std::string method = f.get<std::string>("method", "direct");
    if (method == "direct") {
        c.methods = {SpeedMethod::direct};
    } else if (method == "skeleton") {
        c.methods = {SpeedMethod::skeleton};
    } else if (method == "both") {
        c.methods = {SpeedMethod::direct, SpeedMethod::skeleton};
    } else {
        throw ConfigError("method", "expected direct, skeleton or both, got " + method);
    }

    if (const Json* r = optional_sub(f, "regeneration")) {
        Fields rf(*r, "regeneration");
        c.regeneration.L = rf.get<double>("L", c.regeneration.L);
        c.regeneration.t0 = rf.get<double>("t0", c.regeneration.t0);
        c.regeneration.lookahead = rf.get<double>("lookahead", c.regeneration.lookahead);
        rf.finish();
    }
    c.regeneration.cone = parse_cone(optional_sub(f, "cone"), c.regeneration.cone, "cone");
    validated("regeneration", [&] {
        RegenerationParams check = c.regeneration;
        if (check.cone.m == 0.0) check.cone.m = 1.0;
        check.validate();
    });

    if (const Json* m = optional_sub(f, "mixing")) {
        Fields mf(*m, "mixing");
        if (mf.has("L_grid")) c.mixing.depths = list_of<double>(mf.sub("L_grid"), "mixing.L_grid");
        c.mixing.duration = mf.get<double>("duration", c.mixing.duration);
        c.mixing.half_width = mf.get<Site>("half_width", c.mixing.half_width);
        c.mixing.cone = parse_cone(optional_sub(mf, "cone"), c.mixing.cone, "mixing.cone");
        mf.finish();
        if (c.mixing.depths.empty()) throw ConfigError("mixing.L_grid", "must not be empty");
        for (std::size_t i = 0; i < c.mixing.depths.size(); ++i) {
            if (!(c.mixing.depths[i] > 0.0)) throw ConfigError("mixing.L_grid[" + std::to_string(i) + "]", "must be positive");
        }
        if (!(c.mixing.duration > 0.0)) throw ConfigError("mixing.duration", "must be positive");
        if (c.mixing.half_width < 0) throw ConfigError("mixing.half_width", "must be >= 0");
    }
    c.mixing.replicas = c.replicas;
    c.mixing.seed = c.seed;
    c.mixing.threads = c.threads;

    if (const Json* v = optional_sub(f, "verify")) {
        Fields vf(*v, "verify");
        if (vf.has("suites")) c.verify.suites = list_of<std::string>(vf.sub("suites"), "verify.suites");
        for (std::size_t i = 0; i < c.verify.suites.size(); ++i) {
            const auto& known = verify_suites();
            if (std::find(known.begin(), known.end(), c.verify.suites[i]) == known.end()) {
                throw ConfigError("verify.suites[" + std::to_string(i) + "]", "unknown suite " + c.verify.suites[i]);
            }
        }
        c.verify.replicas = vf.get<std::size_t>("replicas", c.replicas);
        c.verify.horizon = vf.get<double>("horizon", c.verify.horizon);
        c.verify.half_width = vf.get<Site>("half_width", c.verify.half_width);
        c.verify.depth = vf.get<double>("depth", c.verify.depth);
        c.verify.lipschitz_delta = vf.get<double>("lipschitz_delta", c.verify.lipschitz_delta);
        if (vf.has("moment_times")) c.verify.moment_times = list_of<double>(vf.sub("moment_times"), "verify.moment_times");
        if (vf.has("moment_powers")) c.verify.moment_powers = list_of<double>(vf.sub("moment_powers"), "verify.moment_powers");
        vf.finish();
        if (c.verify.replicas == 0) throw ConfigError("verify.replicas", "must be at least 1");
        if (!(c.verify.horizon > 0.0)) throw ConfigError("verify.horizon", "must be positive");
        if (c.verify.half_width < 2) throw ConfigError("verify.half_width", "must be at least 2");
        if (!(c.verify.depth > 0.0) || c.verify.depth > c.verify.horizon) {
            throw ConfigError("verify.depth", "must lie in (0, verify.horizon]");
        }
        if (c.verify.lipschitz_delta < 0.0) throw ConfigError("verify.lipschitz_delta", "must be >= 0");
    } else {
        c.verify.replicas = c.replicas;
    }

    c.overrun_threshold = f.get<double>("overrun_threshold", c.overrun_threshold);
    if (!(c.overrun_threshold >= 0.0 && c.overrun_threshold <= 1.0)) {
        throw ConfigError("overrun_threshold", "must lie in [0, 1]");
    }
    if (const Json* o = optional_sub(f, "outputs")) {
        Fields of(*o, "outputs");
        c.out_dir = of.get<std::string>("dir", c.out_dir);
        c.write_paths = of.get<bool>("paths", c.write_paths);
        of.finish();
    }
    f.finish();
    if (overrides.out) c.out_dir = *overrides.out;
    c.document = std::move(document);
    return c;
}

ExperimentConfig load_config(const std::string& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    Json document;
    try {
        document = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", "malformed JSON in " + path + ": " + e.what());
    }
    return parse_config(std::move(document), overrides);
}

const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> names{"sandwich",    "monotonicity", "triple_order", "healthy_discrepancy",
                                                "tcp_lcp",     "lipschitz",    "moments",      "speed_bounds"};
    return names;
}

std::string config_hash(const Json& document) {
    Json hashed = document;
    hashed.erase("threads");
    hashed.erase("outputs");
    return hex64(fnv1a(hashed.dump()));
}

std::uint64_t fnv1a(const std::string& bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace rwdre::cli
