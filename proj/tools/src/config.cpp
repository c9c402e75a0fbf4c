#include "semot_cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace semot::cli {

namespace {

constexpr std::string_view kCommandNames[] = {"solve1d", "solve2d", "entropy-limit", "poisson-moments",
                                              "ldp-check"};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    if constexpr (std::is_floating_point_v<T>) {
        const auto res = std::from_chars(first, last, out, std::chars_format::general);
        return res.ec == std::errc{} && res.ptr == last;
    } else {
        const auto res = std::from_chars(first, last, out);
        return res.ec == std::errc{} && res.ptr == last;
    }
}

class Reader {
public:
    std::vector<std::string> errors;

    void error(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

    bool expect_map(const YAML::Node& node, const std::string& path) {
        if (node.IsMap()) return true;
        error(path, "expected a mapping");
        return false;
    }

    void reject_unknown(const YAML::Node& node, const std::string& path,
                        std::initializer_list<std::string_view> allowed) {
        for (const auto& kv : node) {
            const std::string key = kv.first.Scalar();
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                error(path.empty() ? key : path + "." + key, "unknown key");
            }
        }
    }

    template <class T>
    bool scalar(const YAML::Node& node, const std::string& path, T& out) {
        if (!node.IsScalar()) {
            error(path, "expected a scalar");
            return false;
        }
        const std::string& text = node.Scalar();
        if constexpr (std::is_same_v<T, bool>) {
            if (text == "true") out = true;
            else if (text == "false") out = false;
            else {
                error(path, "expected true or false, got '" + text + "'");
                return false;
            }
            return true;
        } else if constexpr (std::is_same_v<T, std::string>) {
            out = text;
            return true;
        } else {
            T v{};
            if (!parse_number(text, v)) {
                error(path, std::string(std::is_integral_v<T> ? "expected an integer" : "expected a number") +
                                ", got '" + text + "'");
                return false;
            }
            if constexpr (std::is_floating_point_v<T>) {
                if (!std::isfinite(v)) {
                    error(path, "must be finite");
                    return false;
                }
            }
            out = v;
            return true;
        }
    }

    template <class T>
    void field(const YAML::Node& map, const std::string& path, const char* key, T& out) {
        const YAML::Node node = map[key];
        if (!node) return;
        scalar(node, path + "." + key, out);
    }

    /// A scalar or a sequence of scalars.
    template <class T>
    void list(const YAML::Node& map, const std::string& path, const char* key, std::vector<T>& out) {
        const YAML::Node node = map[key];
        if (!node) return;
        const std::string p = path + "." + key;
        std::vector<T> values;
        if (node.IsScalar()) {
            T v{};
            if (scalar(node, p, v)) values.push_back(v);
        } else if (node.IsSequence()) {
            for (std::size_t i = 0; i < node.size(); ++i) {
                T v{};
                if (scalar(node[i], p + "[" + std::to_string(i) + "]", v)) values.push_back(v);
            }
        } else {
            error(p, "expected a scalar or a list");
            return;
        }
        out = std::move(values);
    }

    void check(bool ok, const std::string& path, const std::string& bound) {
        if (!ok) error(path, bound);
    }
};

template <class T>
std::string shown(T v) {
    if constexpr (std::is_floating_point_v<T>) return shortest(v);
    else return std::to_string(v);
}

#define SEMOT_RANGE(reader, path, value, cond, bound) \
    (reader).check((cond), (path), std::string("must be ") + (bound) + " (got " + shown(value) + ")")

void read_grid(Reader& r, const YAML::Node& node, GridBlock& g) {
    if (!r.expect_map(node, "grid")) return;
    r.reject_unknown(node, "grid", {"dim", "nx", "nt", "T"});
    r.field(node, "grid", "dim", g.dim);
    r.field(node, "grid", "nx", g.nx);
    r.field(node, "grid", "nt", g.nt);
    r.field(node, "grid", "T", g.horizon);
    SEMOT_RANGE(r, "grid.dim", g.dim, g.dim == 1 || g.dim == 2, "1 or 2");
    SEMOT_RANGE(r, "grid.nx", g.nx, g.nx >= 4, ">= 4");
    SEMOT_RANGE(r, "grid.nt", g.nt, g.nt >= 1, ">= 1");
    SEMOT_RANGE(r, "grid.T", g.horizon, g.horizon > 0.0, "> 0");
}

MarginalSpec read_marginal(Reader& r, const YAML::Node& node, const std::string& path) {
    MarginalSpec m;
    if (!r.expect_map(node, path)) return m;
    if (!node["type"]) {
        r.error(path + ".type", "required (gaussian, mixture or uniform)");
        return m;
    }
    r.field(node, path, "type", m.type);
    if (m.type == "gaussian") {
        r.reject_unknown(node, path, {"type", "center", "sd", "angle"});
        if (!node["center"]) r.error(path + ".center", "required");
        if (!node["sd"]) r.error(path + ".sd", "required");
        r.list(node, path, "center", m.center);
        r.list(node, path, "sd", m.sd);
        r.field(node, path, "angle", m.angle);
        for (std::size_t i = 0; i < m.sd.size(); ++i) {
            SEMOT_RANGE(r, path + ".sd", m.sd[i], m.sd[i] > 0.0, "> 0");
        }
    } else if (m.type == "mixture") {
        r.reject_unknown(node, path, {"type", "q", "d1", "s0", "s1"});
        for (const char* key : {"q", "d1", "s0", "s1"}) {
            if (!node[key]) r.error(path + "." + key, "required");
        }
        r.field(node, path, "q", m.q);
        r.field(node, path, "d1", m.d1);
        r.field(node, path, "s0", m.s0);
        r.field(node, path, "s1", m.s1);
        SEMOT_RANGE(r, path + ".q", m.q, m.q >= 0.0 && m.q <= 1.0, "in [0, 1]");
        SEMOT_RANGE(r, path + ".s0", m.s0, m.s0 > 0.0, "> 0");
        SEMOT_RANGE(r, path + ".s1", m.s1, m.s1 > 0.0, "> 0");
    } else if (m.type == "uniform") {
        r.reject_unknown(node, path, {"type"});
    } else {
        r.error(path + ".type", "unknown constructor '" + m.type + "' (expected gaussian, mixture or uniform)");
    }
    return m;
}

void read_sinkhorn(Reader& r, const YAML::Node& node, SinkhornBlock& s) {
    const std::string p = "sinkhorn";
    if (!r.expect_map(node, p)) return;
    r.reject_unknown(node, p,
                     {"eta0", "smoothing_passes", "density_floor", "l1_tolerance", "max_outer", "adaptive",
                      "eta_down", "eta_up", "eta_min", "eta_max", "anderson_memory", "anderson_regularization",
                      "newton_tol", "newton_max_iter"});
    if (const YAML::Node e = node["eta0"]; e) {
        if (e.IsScalar() && e.Scalar() == "dt") {
            s.eta0.reset();
        } else {
            double v = 0.0;
            if (r.scalar(e, p + ".eta0", v)) {
                s.eta0 = v;
                SEMOT_RANGE(r, p + ".eta0", v, v > 0.0, "> 0 or 'dt'");
            }
        }
    }
    r.field(node, p, "smoothing_passes", s.smoothing_passes);
    r.field(node, p, "density_floor", s.density_floor);
    r.field(node, p, "l1_tolerance", s.l1_tolerance);
    r.field(node, p, "max_outer", s.max_outer);
    r.field(node, p, "adaptive", s.adaptive);
    r.field(node, p, "eta_down", s.eta_down);
    r.field(node, p, "eta_up", s.eta_up);
    r.field(node, p, "eta_min", s.eta_min);
    r.field(node, p, "eta_max", s.eta_max);
    r.field(node, p, "anderson_memory", s.anderson_memory);
    r.field(node, p, "anderson_regularization", s.anderson_regularization);
    r.field(node, p, "newton_tol", s.newton_tol);
    r.field(node, p, "newton_max_iter", s.newton_max_iter);
    SEMOT_RANGE(r, p + ".smoothing_passes", s.smoothing_passes, s.smoothing_passes >= 0, ">= 0");
    SEMOT_RANGE(r, p + ".density_floor", s.density_floor, s.density_floor > 0.0, "> 0");
    SEMOT_RANGE(r, p + ".l1_tolerance", s.l1_tolerance, s.l1_tolerance >= 0.0, ">= 0");
    SEMOT_RANGE(r, p + ".max_outer", s.max_outer, s.max_outer >= 1, ">= 1");
    SEMOT_RANGE(r, p + ".eta_down", s.eta_down, s.eta_down > 0.0 && s.eta_down < 1.0, "in (0, 1)");
    SEMOT_RANGE(r, p + ".eta_up", s.eta_up, s.eta_up > 1.0, "> 1");
    SEMOT_RANGE(r, p + ".eta_min", s.eta_min, s.eta_min > 0.0, "> 0");
    SEMOT_RANGE(r, p + ".eta_max", s.eta_max, s.eta_max >= s.eta_min, ">= eta_min");
    SEMOT_RANGE(r, p + ".anderson_memory", s.anderson_memory, s.anderson_memory >= 0, ">= 0");
    SEMOT_RANGE(r, p + ".anderson_regularization", s.anderson_regularization, s.anderson_regularization >= 0.0,
                ">= 0");
    SEMOT_RANGE(r, p + ".newton_tol", s.newton_tol, s.newton_tol > 0.0, "> 0");
    SEMOT_RANGE(r, p + ".newton_max_iter", s.newton_max_iter, s.newton_max_iter >= 1, ">= 1");
}

void read_poisson(Reader& r, const YAML::Node& node, PoissonBlock& s) {
    const std::string p = "poisson";
    if (!r.expect_map(node, p)) return;
    r.reject_unknown(node, p,
                     {"scheme", "sigma1", "modulation", "x0", "lambda", "sigma_bar", "n_list", "n_paths", "seed",
                      "lambda_max", "threads", "euler_steps", "interarrivals", "replicates"});
    r.field(node, p, "scheme", s.scheme);
    r.field(node, p, "sigma1", s.sigma1);
    r.field(node, p, "modulation", s.modulation);
    r.field(node, p, "x0", s.x0);
    r.field(node, p, "lambda", s.lambda);
    r.list(node, p, "sigma_bar", s.sigma_bar);
    r.list(node, p, "n_list", s.n_list);
    r.field(node, p, "n_paths", s.n_paths);
    r.field(node, p, "seed", s.seed);
    if (node["lambda_max"]) {
        double v = 0.0;
        r.field(node, p, "lambda_max", v);
        s.lambda_max = v;
        SEMOT_RANGE(r, p + ".lambda_max", v, v > 0.0, "> 0");
    }
    r.field(node, p, "threads", s.threads);
    r.field(node, p, "euler_steps", s.euler_steps);
    r.field(node, p, "interarrivals", s.interarrivals);
    r.field(node, p, "replicates", s.replicates);

    if (s.scheme != "unit-intensity" && s.scheme != "trace-normalized") {
        r.error(p + ".scheme", "must be unit-intensity or trace-normalized (got '" + s.scheme + "')");
    }
    SEMOT_RANGE(r, p + ".sigma1", s.sigma1, s.sigma1 > 0.0, "> 0");
    SEMOT_RANGE(r, p + ".modulation", s.modulation, s.modulation >= 0.0 && s.modulation < 1.0, "in [0, 1)");
    SEMOT_RANGE(r, p + ".lambda", s.lambda, s.lambda > 0.0, "> 0");
    if (s.sigma_bar.empty()) r.error(p + ".sigma_bar", "must not be empty");
    for (double v : s.sigma_bar) SEMOT_RANGE(r, p + ".sigma_bar", v, v > 0.0, "> 0");
    if (s.n_list.empty()) r.error(p + ".n_list", "must not be empty");
    for (int n : s.n_list) SEMOT_RANGE(r, p + ".n_list", n, n >= 1, ">= 1");
    SEMOT_RANGE(r, p + ".n_paths", s.n_paths, s.n_paths >= 2, ">= 2");
    SEMOT_RANGE(r, p + ".threads", s.threads, s.threads >= 0, ">= 0");
    SEMOT_RANGE(r, p + ".euler_steps", s.euler_steps, s.euler_steps >= 100, ">= 100");
    SEMOT_RANGE(r, p + ".interarrivals", s.interarrivals, s.interarrivals >= 2, ">= 2");
    SEMOT_RANGE(r, p + ".replicates", s.replicates, s.replicates >= 2, ">= 2");
}

ExperimentConfig read_root(const YAML::Node& root) {
    Reader r;
    ExperimentConfig c;
    if (!root || root.IsNull()) throw ConfigError({"<root>: empty configuration"});
    if (!root.IsMap()) throw ConfigError({"<root>: expected a mapping"});
    r.reject_unknown(root, "", {"command", "grid", "marginals", "sinkhorn", "poisson", "output"});
    if (const YAML::Node n = root["command"]; n) {
        std::string name;
        if (r.scalar(n, "command", name)) {
            c.command = parse_command(name);
            if (!c.command) r.error("command", "unknown command '" + name + "'");
        }
    }
    if (const YAML::Node n = root["grid"]; n) read_grid(r, n, c.grid);
    if (const YAML::Node n = root["marginals"]; n && r.expect_map(n, "marginals")) {
        r.reject_unknown(n, "marginals", {"mu0", "mu1"});
        if (n["mu0"]) c.mu0 = read_marginal(r, n["mu0"], "marginals.mu0");
        if (n["mu1"]) c.mu1 = read_marginal(r, n["mu1"], "marginals.mu1");
    }
    if (const YAML::Node n = root["sinkhorn"]; n) read_sinkhorn(r, n, c.sinkhorn);
    if (const YAML::Node n = root["poisson"]; n) read_poisson(r, n, c.poisson);
    if (const YAML::Node n = root["output"]; n && r.expect_map(n, "output")) {
        r.reject_unknown(n, "output", {"dir"});
        r.field(n, "output", "dir", c.output_dir);
        if (c.output_dir.empty()) r.error("output.dir", "must not be empty");
    }
    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
    return c;
}

void emit_number(YAML::Emitter& out, double v) { out << shortest(v); }

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) emit_number(out, x);
    out << YAML::EndSeq;
}

void emit_marginal(YAML::Emitter& out, const MarginalSpec& m) {
    out << YAML::BeginMap << YAML::Key << "type" << YAML::Value << m.type;
    if (m.type == "gaussian") {
        out << YAML::Key << "center" << YAML::Value;
        emit_list(out, m.center);
        out << YAML::Key << "sd" << YAML::Value;
        emit_list(out, m.sd);
        out << YAML::Key << "angle" << YAML::Value;
        emit_number(out, m.angle);
    } else if (m.type == "mixture") {
        for (const auto& [key, v] : {std::pair{"q", m.q}, {"d1", m.d1}, {"s0", m.s0}, {"s1", m.s1}}) {
            out << YAML::Key << key << YAML::Value;
            emit_number(out, v);
        }
    }
    out << YAML::EndMap;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kCommandNames); ++i) {
        if (kCommandNames[i] == name) return static_cast<Command>(i);
    }
    return std::nullopt;
}

std::string to_string(Command command) { return std::string(kCommandNames[static_cast<std::size_t>(command)]); }

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration:\n  " + join(errors, "\n  ")), errors_(std::move(errors)) {}

SinkhornConfig SinkhornBlock::resolve(const PeriodicGrid& grid) const {
    SinkhornConfig c;
    c.eta0 = eta0.value_or(grid.dt());
    c.smoothing_passes = smoothing_passes;
    c.density_floor = density_floor;
    c.l1_tolerance = l1_tolerance;
    c.max_outer = max_outer;
    c.adaptive = adaptive;
    c.eta_down = eta_down;
    c.eta_up = eta_up;
    c.eta_min = eta_min;
    c.eta_max = eta_max;
    c.anderson_memory = anderson_memory;
    c.anderson_regularization = anderson_regularization;
    c.newton.tol = newton_tol;
    c.newton.max_newton = newton_max_iter;
    return c;
}

ExperimentConfig parse_config_string(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError({std::string("<syntax>: ") + e.what()});
    }
    return read_root(root);
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open configuration file"});
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_string(text.str());
}

std::string write_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    if (c.command) out << YAML::Key << "command" << YAML::Value << to_string(*c.command);

    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dim" << YAML::Value << c.grid.dim;
    out << YAML::Key << "nx" << YAML::Value << c.grid.nx;
    out << YAML::Key << "nt" << YAML::Value << c.grid.nt;
    out << YAML::Key << "T" << YAML::Value;
    emit_number(out, c.grid.horizon);
    out << YAML::EndMap;

    if (c.mu0 || c.mu1) {
        out << YAML::Key << "marginals" << YAML::Value << YAML::BeginMap;
        if (c.mu0) {
            out << YAML::Key << "mu0" << YAML::Value;
            emit_marginal(out, *c.mu0);
        }
        if (c.mu1) {
            out << YAML::Key << "mu1" << YAML::Value;
            emit_marginal(out, *c.mu1);
        }
        out << YAML::EndMap;
    }

    const SinkhornBlock& s = c.sinkhorn;
    out << YAML::Key << "sinkhorn" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "eta0" << YAML::Value;
    if (s.eta0) emit_number(out, *s.eta0);
    else out << "dt";
    out << YAML::Key << "smoothing_passes" << YAML::Value << s.smoothing_passes;
    out << YAML::Key << "density_floor" << YAML::Value;
    emit_number(out, s.density_floor);
    out << YAML::Key << "l1_tolerance" << YAML::Value;
    emit_number(out, s.l1_tolerance);
    out << YAML::Key << "max_outer" << YAML::Value << s.max_outer;
    out << YAML::Key << "adaptive" << YAML::Value << (s.adaptive ? "true" : "false");
    for (const auto& [key, v] : {std::pair{"eta_down", s.eta_down}, {"eta_up", s.eta_up}, {"eta_min", s.eta_min},
                                 {"eta_max", s.eta_max}}) {
        out << YAML::Key << key << YAML::Value;
        emit_number(out, v);
    }
    out << YAML::Key << "anderson_memory" << YAML::Value << s.anderson_memory;
    out << YAML::Key << "anderson_regularization" << YAML::Value;
    emit_number(out, s.anderson_regularization);
    out << YAML::Key << "newton_tol" << YAML::Value;
    emit_number(out, s.newton_tol);
    out << YAML::Key << "newton_max_iter" << YAML::Value << s.newton_max_iter;
    out << YAML::EndMap;

    const PoissonBlock& p = c.poisson;
    out << YAML::Key << "poisson" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "scheme" << YAML::Value << p.scheme;
    for (const auto& [key, v] : {std::pair{"sigma1", p.sigma1}, {"modulation", p.modulation}, {"x0", p.x0},
                                 {"lambda", p.lambda}}) {
        out << YAML::Key << key << YAML::Value;
        emit_number(out, v);
    }
    out << YAML::Key << "sigma_bar" << YAML::Value;
    emit_list(out, p.sigma_bar);
    out << YAML::Key << "n_list" << YAML::Value << YAML::Flow << p.n_list;
    out << YAML::Key << "n_paths" << YAML::Value << p.n_paths;
    out << YAML::Key << "seed" << YAML::Value << p.seed;
    if (p.lambda_max) {
        out << YAML::Key << "lambda_max" << YAML::Value;
        emit_number(out, *p.lambda_max);
    }
    out << YAML::Key << "threads" << YAML::Value << p.threads;
    out << YAML::Key << "euler_steps" << YAML::Value << p.euler_steps;
    out << YAML::Key << "interarrivals" << YAML::Value << p.interarrivals;
    out << YAML::Key << "replicates" << YAML::Value << p.replicates;
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << c.output_dir;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<std::string> validate_for_command(const ExperimentConfig& c, Command command) {
    std::vector<std::string> errors;
    if (c.command && *c.command != command) {
        errors.push_back("command: configuration is for '" + to_string(*c.command) + "', not '" +
                         to_string(command) + "'");
    }
    const bool solve = command == Command::solve1d || command == Command::solve2d;
    if (solve) {
        const int want = command == Command::solve1d ? 1 : 2;
        if (c.grid.dim != want) {
            errors.push_back("grid.dim: must be " + std::to_string(want) + " for " + to_string(command) +
                             " (got " + std::to_string(c.grid.dim) + ")");
        }
        for (const auto& [name, m] : {std::pair{"mu0", &c.mu0}, {"mu1", &c.mu1}}) {
            const std::string path = std::string("marginals.") + name;
            if (!*m) {
                errors.push_back(path + ": required for " + to_string(command));
                continue;
            }
            const MarginalSpec& spec = **m;
            if (spec.type == "gaussian") {
                const auto d = static_cast<std::size_t>(c.grid.dim);
                if (spec.center.size() != d) errors.push_back(path + ".center: needs " + std::to_string(d) + " entries");
                if (spec.sd.size() != d) errors.push_back(path + ".sd: needs " + std::to_string(d) + " entries");
                if (d == 1 && spec.angle != 0.0) errors.push_back(path + ".angle: only valid in 2D");
            } else if (spec.type == "mixture" && c.grid.dim != 1) {
                errors.push_back(path + ".type: mixture is a 1D constructor");
            }
        }
    }
    if (command == Command::entropy_limit && c.poisson.lambda_max &&
        *c.poisson.lambda_max < c.poisson.sigma1 * (1.0 + c.poisson.modulation)) {
        errors.push_back("poisson.lambda_max: must be >= sigma1 * (1 + modulation) (got " +
                         shortest(*c.poisson.lambda_max) + ")");
    }
    return errors;
}

Density build_marginal(const MarginalSpec& spec, const PeriodicGrid& grid) {
    if (spec.type == "uniform") return uniform_density(grid);
    if (spec.type == "mixture") return gaussian_mixture_1d(spec.q, spec.d1, spec.s0, spec.s1, grid);
    if (spec.type == "gaussian") {
        if (grid.dim == 1) return periodized_gaussian(spec.center.at(0), spec.sd.at(0), grid);
        return rotated_gaussian_2d({spec.center.at(0), spec.center.at(1)}, {spec.sd.at(0), spec.sd.at(1)}, spec.angle,
                                   grid);
    }
    throw std::invalid_argument("build_marginal: unknown constructor '" + spec.type + "'");
}

}  // namespace semot::cli
