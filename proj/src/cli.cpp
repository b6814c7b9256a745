#include "qbm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/force.hpp"
#include "qbm/parametric.hpp"
#include "qbm/wigner.hpp"

namespace qbm::cli {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// CSV

void CsvTable::add(std::string name, std::vector<double> column) {
    names.push_back(std::move(name));
    columns.push_back(std::move(column));
}

std::size_t CsvTable::rows() const { return columns.empty() ? 0 : columns.front().size(); }

namespace {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void emit_csv(const CsvTable& table, const std::string& path) {
    if (table.names.size() != table.columns.size())
        throw Error(ErrorKind::DomainError, "CSV header and column count differ");
    const std::size_t n = table.rows();
    for (const auto& c : table.columns)
        if (c.size() != n) throw Error(ErrorKind::DomainError, "CSV columns must have equal length");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
    for (std::size_t j = 0; j < table.names.size(); ++j) out << (j ? "," : "") << quote(table.names[j]);
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << format_number(table.columns[j][i]);
        out << '\n';
    }
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) return t;
    {
        std::stringstream ss(line);
        std::string name;
        while (std::getline(ss, name, ',')) t.add(name, {});
    }
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(ss, cell, ',')) {
            if (j >= t.columns.size()) throw Error(ErrorKind::IoError, path + ": row longer than header");
            t.columns[j++].push_back(std::strtod(cell.c_str(), nullptr));
        }
        if (j != t.columns.size()) throw Error(ErrorKind::IoError, path + ": short row");
    }
    return t;
}

// ---------------------------------------------------------------------------
// Threads

unsigned thread_count() {
    const char* env = std::getenv("QBM_THREADS");
    if (env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1) throw Error(ErrorKind::ConfigError, "QBM_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"coeffs", "evolve", "compare", "sweep", "forced", "parametric"};
    return names;
}

namespace {

// ---------------------------------------------------------------------------
// Config access

class Config {
public:
    explicit Config(const std::string& text) {
        std::istringstream in(text);
        try {
            pt::read_ini(in, tree_);
        } catch (const pt::ini_parser_error& e) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
        }
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty())
                throw Error(ErrorKind::ConfigError, "key '" + section + "' must be inside a [section]");
        }
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        const auto raw = lookup(section, key);
        const double v = raw ? parse_number(section, key, *raw) : fallback;
        record(section, key, format_number(v));
        return v;
    }

    int integer(const std::string& section, const std::string& key, int fallback) {
        const double v = number(section, key, fallback);
        if (v != std::floor(v) || std::abs(v) > 1e9)
            throw Error(ErrorKind::ConfigError, section + "." + key + " must be an integer");
        return static_cast<int>(v);
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) {
        const auto raw = lookup(section, key);
        std::string v = raw ? trim(*raw) : fallback;
        record(section, key, v);
        return v;
    }

    std::vector<double> numbers(const std::string& section, const std::string& key, std::vector<double> fallback) {
        const auto raw = lookup(section, key);
        std::vector<double> out;
        if (raw) {
            for (const auto& item : split(*raw)) out.push_back(parse_number(section, key, item));
        } else {
            out = std::move(fallback);
        }
        std::string joined;
        for (std::size_t i = 0; i < out.size(); ++i) joined += (i ? ", " : "") + format_number(out[i]);
        record(section, key, joined);
        return out;
    }

    std::vector<std::string> words(const std::string& section, const std::string& key,
                                   std::vector<std::string> fallback) {
        const auto raw = lookup(section, key);
        std::vector<std::string> out = raw ? split(*raw) : std::move(fallback);
        std::string joined;
        for (std::size_t i = 0; i < out.size(); ++i) joined += (i ? ", " : "") + out[i];
        record(section, key, joined);
        return out;
    }

    bool has(const std::string& section, const std::string& key) const { return lookup(section, key).has_value(); }

    // Every key in the file must have been consumed by the command.
    void reject_unknown() const {
        for (const auto& [section, body] : tree_)
            for (const auto& [key, value] : body)
                if (!used_.count(section + "." + key))
                    throw Error(ErrorKind::ConfigError, "unknown key " + section + "." + key);
    }

    std::string resolved() const {
        std::ostringstream os;
        std::string current;
        for (const auto& [path, value] : resolved_) {
            const auto dot = path.find('.');
            const std::string section = path.substr(0, dot);
            if (section != current) {
                os << (current.empty() ? "" : "\n") << "[" << section << "]\n";
                current = section;
            }
            os << path.substr(dot + 1) << " = " << value << "\n";
        }
        return os.str();
    }

private:
    std::optional<std::string> lookup(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        used_.insert(section + "." + key);
        if (trim(*v).empty()) return std::nullopt;
        return *v;
    }

    void record(const std::string& section, const std::string& key, const std::string& v) {
        used_.insert(section + "." + key);
        resolved_[section + "." + key] = v;
    }

    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    static double parse_number(const std::string& section, const std::string& key, const std::string& raw) {
        const std::string s = trim(raw);
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0' || !std::isfinite(v))
            throw Error(ErrorKind::ConfigError, section + "." + key + ": '" + s + "' is not a finite number");
        return v;
    }

    pt::ptree tree_;
    mutable std::set<std::string> used_;
    std::map<std::string, std::string> resolved_;
};

// A numerical failure tagged with the operation that raised it.
struct StageFailure : std::runtime_error {
    StageFailure(const std::string& op, const std::string& what)
        : std::runtime_error(op + " failed: " + what) {}
};

bool is_config_kind(ErrorKind k) { return k == ErrorKind::ConfigError || k == ErrorKind::InvalidSpec; }

template <typename F>
auto stage(const std::string& op, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (is_config_kind(e.kind()) || e.kind() == ErrorKind::IoError) throw;
        throw StageFailure(op, e.what());
    }
}

std::string at_t(const std::string& name, double t) { return name + "(t = " + format_number(t) + ")"; }

// ---------------------------------------------------------------------------
// Shared parameter blocks

struct Scenario {
    OscillatorSpec osc{1.0, 1.0, 0.3};
    BathSpec bath;
    ExpansionControl ctrl;
    std::vector<std::string> warnings;
};

void warn(std::vector<std::string>& sink, const std::string& w) {
    if (std::find(sink.begin(), sink.end(), w) == sink.end()) sink.push_back(w);
}

Scenario read_scenario(Config& cfg) {
    Scenario s;
    const double m = cfg.number("oscillator", "mass", 1.0);
    const double w = cfg.number("oscillator", "omega_r", 1.0);
    const double g = cfg.number("oscillator", "gamma0", 0.3);
    s.osc = OscillatorSpec(m, w, g);
    s.bath.temperature = cfg.number("bath", "temperature", 1.0);
    s.bath.cutoff_uv = cfg.number("bath", "cutoff_uv", 1000.0);
    s.bath.cutoff_ir = cfg.number("bath", "cutoff_ir", 0.0);
    s.bath.supraohmic = cfg.numbers("bath", "supraohmic", {});
    s.bath.subohmic = cfg.numbers("bath", "subohmic", {});
    s.ctrl.k_max = cfg.integer("control", "k_max", 200);
    s.ctrl.rel_tol = cfg.number("control", "rel_tol", 1e-8);
    s.ctrl.abs_tol = cfg.number("control", "abs_tol", 1e-12);
    if (s.ctrl.k_max < 1 || !(s.ctrl.rel_tol > 0.0) || !(s.ctrl.abs_tol >= 0.0))
        throw Error(ErrorKind::ConfigError, "control: k_max >= 1, rel_tol > 0 and abs_tol >= 0 required");
    for (const auto& w2 : validate(s.bath, s.osc)) warn(s.warnings, w2);
    return s;
}

std::vector<double> read_grid(Config& cfg, const std::string& section, double start, double end, int n,
                              const std::string& spacing_default) {
    if (cfg.has(section, "values")) {
        auto v = cfg.numbers(section, "values", {});
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) throw Error(ErrorKind::ConfigError, section + ".values must be strictly increasing");
        return v;
    }
    const double a = cfg.number(section, "start", start);
    const double b = cfg.number(section, "end", end);
    const int count = cfg.integer(section, "n_points", n);
    const std::string spacing = cfg.text(section, "spacing", spacing_default);
    if (count < 2) throw Error(ErrorKind::ConfigError, section + ".n_points must be at least 2");
    if (!(b > a)) throw Error(ErrorKind::ConfigError, section + ": end must exceed start");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (spacing == "linear") {
        for (int i = 0; i < count; ++i) out[i] = a + (b - a) * i / (count - 1);
    } else if (spacing == "log") {
        if (!(a > 0.0)) throw Error(ErrorKind::ConfigError, section + ": log spacing needs start > 0");
        for (int i = 0; i < count; ++i) out[i] = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
    } else {
        throw Error(ErrorKind::ConfigError, section + ".spacing must be linear or log");
    }
    out.back() = b;
    return out;
}

std::vector<double> read_times(Config& cfg, double start, double end, int n) {
    return read_grid(cfg, "time", start, end, n, "linear");
}

Method parse_method(const std::string& name) {
    try {
        return method_from_string(name);
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, e.what());
    }
}

FourierWignerState read_state(Config& cfg) {
    FourierWignerState s;
    s.mean << cfg.number("state", "mean_x", 1.0), cfg.number("state", "mean_p", 0.0);
    const double xx = cfg.number("state", "sigma_xx", 0.5);
    const double xp = cfg.number("state", "sigma_xp", 0.0);
    const double pp = cfg.number("state", "sigma_pp", 0.5);
    s.covariance << xx, xp, xp, pp;
    const double shear = cfg.number("state", "kick_shear", 0.0);
    try {
        s.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, std::string("state: ") + e.what());
    }
    if (shear != 0.0) s = apply_kick(s, KickTransform{shear});
    return s;
}

ThermalCovariance read_covariance(Config& cfg, const Scenario& sc, double t_max) {
    const Method m = parse_method(cfg.text("method", "covariance", "general"));
    return stage("thermal_covariance(" + std::string(to_string(m)) + ")",
                 [&] { return ThermalCovariance(sc.osc, sc.bath, m, sc.ctrl, t_max); });
}

double entropy_or_nan(const Mat2& cov) {
    const double det = cov.determinant();
    return det > 0.0 ? 1.0 - 0.5 / std::sqrt(det) : std::nan("");
}

std::string lambda_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    std::string s(buf);
    s.erase(std::remove(s.begin(), s.end(), '+'), s.end());
    return s;
}

// ---------------------------------------------------------------------------
// Commands

CsvTable cmd_coeffs(Config& cfg, Scenario& sc) {
    const auto names = cfg.words("method", "methods", {"oracle", "low_t", "high_t", "general"});
    std::vector<Method> methods;
    for (const auto& n : names) methods.push_back(parse_method(n));
    const std::string quantity = cfg.text("method", "quantity", "both");
    if (quantity != "fc1" && quantity != "diffusion" && quantity != "both")
        throw Error(ErrorKind::ConfigError, "method.quantity must be fc1, diffusion or both");
    const auto ts = read_times(cfg, 0.5, 20.0, 40);
    cfg.reject_unknown();
    for (double t : ts)
        if (!(t > 0.0)) throw Error(ErrorKind::ConfigError, "coeffs needs t > 0");

    const bool want_fc1 = quantity != "diffusion";
    const bool want_d = quantity != "fc1";
    auto has_fc1 = [](Method m) {
        return m == Method::Oracle || m == Method::LowT || m == Method::HighT || m == Method::HighTIntegral ||
               m == Method::GeneralApprox;
    };
    const std::size_t nm = methods.size();
    std::vector<std::vector<double>> fc1(nm, std::vector<double>(ts.size())), dxp = fc1, dpp = fc1;
    std::vector<std::vector<std::string>> warns(ts.size() * nm);
    parallel_for(ts.size() * nm, [&](std::size_t idx) {
        const std::size_t i = idx / nm, j = idx % nm;
        const double t = ts[i];
        const Method m = methods[j];
        const std::string tag = std::string(to_string(m));
        if (want_fc1 && has_fc1(m))
            fc1[j][i] = stage(at_t("fc1[" + tag + "]", t), [&] { return fc1_by_method(t, sc.osc, sc.bath, m, sc.ctrl); });
        if (want_d) {
            const auto d = stage(at_t("diffusion_at[" + tag + "]", t),
                                 [&] { return diffusion_at(t, sc.osc, sc.bath, m, sc.ctrl); });
            dxp[j][i] = d.d_xp;
            dpp[j][i] = d.d_pp;
            for (const auto& w : d.warnings) warns[idx].push_back(tag + ": " + w);
        }
    });
    for (const auto& ws : warns)
        for (const auto& w : ws) warn(sc.warnings, w);

    CsvTable out;
    out.add("t", ts);
    for (std::size_t j = 0; j < nm; ++j)
        if (want_fc1 && has_fc1(methods[j])) out.add("fc1_" + names[j], fc1[j]);
    if (want_d) {
        for (std::size_t j = 0; j < nm; ++j) out.add("d_xp_" + names[j], dxp[j]);
        for (std::size_t j = 0; j < nm; ++j) out.add("d_pp_" + names[j], dpp[j]);
    }
    return out;
}

CsvTable cmd_evolve(Config& cfg, Scenario& sc) {
    const FourierWignerState s0 = read_state(cfg);
    const auto ts = read_times(cfg, 0.0, 100.0, 201);
    const ThermalCovariance sigma = [&] {
        auto c = read_covariance(cfg, sc, ts.back());
        cfg.reject_unknown();
        return c;
    }();
    if (ts.front() < 0.0) throw Error(ErrorKind::ConfigError, "evolve needs t >= 0");
    const std::size_t n = ts.size();
    std::vector<double> mx(n), mp(n), sxx(n), sxp(n), spp(n), det(n), sl(n);
    parallel_for(n, [&](std::size_t i) {
        const auto st = stage(at_t("evolve_cumulants", ts[i]), [&] { return evolve_cumulants(s0, ts[i], sc.osc, sigma); });
        mx[i] = st.mean[0];
        mp[i] = st.mean[1];
        sxx[i] = st.covariance(0, 0);
        sxp[i] = st.covariance(0, 1);
        spp[i] = st.covariance(1, 1);
        det[i] = st.covariance.determinant();
        sl[i] = entropy_or_nan(st.covariance);
    });
    CsvTable out;
    out.add("t", ts);
    out.add("mean_x", mx);
    out.add("mean_p", mp);
    out.add("sigma_xx", sxx);
    out.add("sigma_xp", sxp);
    out.add("sigma_pp", spp);
    out.add("det_sigma", det);
    out.add("linear_entropy", sl);
    return out;
}

CsvTable cmd_compare(Config& cfg, Scenario& sc) {
    const auto cutoffs = cfg.numbers("compare", "cutoffs", {1e3, 1e9});
    const auto temps = read_grid(cfg, "grid", 0.01, 100.0, 41, "log");
    cfg.reject_unknown();
    if (cutoffs.empty()) throw Error(ErrorKind::ConfigError, "compare.cutoffs must not be empty");
    const std::size_t n = temps.size(), nl = cutoffs.size();
    std::vector<double> ccr(n), ccr_dxdp(n), ext(n);
    std::vector<std::vector<double>> hxp(nl, std::vector<double>(n)), hpp = hxp, spp = hxp, hdd = hxp, sdd = hxp;
    for (double lam : cutoffs) {
        BathSpec b = sc.bath;
        b.cutoff_uv = lam;
        for (const auto& w : validate(b, sc.osc)) warn(sc.warnings, w);
    }
    const double g = sc.osc.gamma0();
    auto dxdp = [&](const DiffusionPair& d) {
        const Mat2 s = late_covariance(sc.osc, d);
        const double prod = s(0, 0) * s(1, 1);
        return prod >= 0.0 ? std::sqrt(prod) : std::nan("");
    };
    if (!(g > 0.0)) throw Error(ErrorKind::ConfigError, "compare needs gamma0 > 0");
    parallel_for(n, [&](std::size_t i) {
        BathSpec b = sc.bath;
        b.temperature = temps[i];
        const std::string at = "(T = " + format_number(temps[i]) + ")";
        const auto c = stage("diffusion_ccr" + at, [&] { return diffusion_ccr(sc.osc, b); });
        ccr[i] = c.d_pp;
        ccr_dxdp[i] = dxdp(c);
        ext[i] = stage("diffusion_extreme_t" + at, [&] { return diffusion_extreme_t(sc.osc, b); }).d_pp;
        for (std::size_t l = 0; l < nl; ++l) {
            b.cutoff_uv = cutoffs[l];
            const auto h = stage("diffusion_late" + at, [&] { return diffusion_late(sc.osc, b); });
            const auto s = stage("diffusion_late_subtracted" + at, [&] { return diffusion_late_subtracted(sc.osc, b); });
            hxp[l][i] = h.d_xp;
            hpp[l][i] = h.d_pp;
            spp[l][i] = s.d_pp;
            hdd[l][i] = dxdp(h);
            sdd[l][i] = dxdp(s);
        }
    });
    CsvTable out;
    out.add("temperature", temps);
    out.add("d_pp_ccr", ccr);
    out.add("d_pp_extreme_t", ext);
    out.add("dxdp_ccr", ccr_dxdp);
    for (std::size_t l = 0; l < nl; ++l) {
        const std::string tag = "_L" + lambda_tag(cutoffs[l]);
        out.add("d_xp_hpz" + tag, hxp[l]);
        out.add("d_pp_hpz" + tag, hpp[l]);
        out.add("d_pp_subtracted" + tag, spp[l]);
        out.add("dxdp_hpz" + tag, hdd[l]);
        out.add("dxdp_subtracted" + tag, sdd[l]);
    }
    return out;
}

CsvTable cmd_sweep(Config& cfg, Scenario& sc) {
    const std::string param = cfg.text("grid", "parameter", "temperature");
    const auto values = read_grid(cfg, "grid", 0.01, 100.0, 41, "log");
    cfg.reject_unknown();
    if (param != "temperature" && param != "gamma0" && param != "cutoff_uv" && param != "omega_r")
        throw Error(ErrorKind::ConfigError, "grid.parameter must be temperature, gamma0, cutoff_uv or omega_r");
    const std::size_t n = values.size();
    std::vector<double> dxp(n), dpp(n), sxp(n), spp(n), sxx(n), sgpp(n), det(n), det_sub(n), sl(n);
    auto configure = [&](double v, OscillatorSpec& osc, BathSpec& b) {
        try {
            if (param == "temperature") b.temperature = v;
            if (param == "cutoff_uv") b.cutoff_uv = v;
            if (param == "gamma0") osc = OscillatorSpec(osc.mass(), osc.omega_r(), v);
            if (param == "omega_r") osc = OscillatorSpec(osc.mass(), v, osc.gamma0());
            validate(b, osc);
        } catch (const Error& e) {
            throw Error(ErrorKind::ConfigError, "grid value " + format_number(v) + ": " + e.what());
        }
    };
    for (double v : values) {
        OscillatorSpec osc = sc.osc;
        BathSpec b = sc.bath;
        configure(v, osc, b);
    }
    parallel_for(n, [&](std::size_t i) {
        OscillatorSpec osc = sc.osc;
        BathSpec b = sc.bath;
        configure(values[i], osc, b);
        const std::string at = "(" + param + " = " + format_number(values[i]) + ")";
        const auto h = stage("diffusion_late" + at, [&] { return diffusion_late(osc, b); });
        const auto s = stage("diffusion_late_subtracted" + at, [&] { return diffusion_late_subtracted(osc, b); });
        const Mat2 c = late_covariance(osc, h);
        dxp[i] = h.d_xp;
        dpp[i] = h.d_pp;
        sxp[i] = s.d_xp;
        spp[i] = s.d_pp;
        sxx[i] = c(0, 0);
        sgpp[i] = c(1, 1);
        det[i] = c.determinant();
        det_sub[i] = late_covariance(osc, s).determinant();
        sl[i] = entropy_or_nan(c);
    });
    CsvTable out;
    out.add(param, values);
    out.add("d_xp", dxp);
    out.add("d_pp", dpp);
    out.add("d_xp_subtracted", sxp);
    out.add("d_pp_subtracted", spp);
    out.add("sigma_xx", sxx);
    out.add("sigma_pp", sgpp);
    out.add("det_sigma", det);
    out.add("det_sigma_subtracted", det_sub);
    out.add("linear_entropy", sl);
    return out;
}

ForceProfile read_force(Config& cfg, const std::string& config_dir) {
    const std::string kind = cfg.text("force", "kind", "constant");
    if (kind == "constant") return ForceProfile::constant(cfg.number("force", "amplitude", 1.0));
    if (kind == "sinusoidal")
        return ForceProfile::sinusoidal(cfg.number("force", "amplitude", 1.0), cfg.number("force", "frequency", 1.0),
                                        cfg.number("force", "phase", 0.0));
    if (kind == "tabulated") {
        fs::path p = cfg.text("force", "table", "");
        if (p.empty()) throw Error(ErrorKind::ConfigError, "force.table is required for tabulated forces");
        if (p.is_relative()) p = fs::path(config_dir) / p;
        return ForceProfile::from_csv(p.string());
    }
    throw Error(ErrorKind::ConfigError, "force.kind must be constant, sinusoidal or tabulated");
}

CsvTable cmd_forced(Config& cfg, Scenario& sc, const std::string& config_dir) {
    const FourierWignerState s0 = read_state(cfg);
    const ForceProfile force = read_force(cfg, config_dir);
    const auto ts = read_times(cfg, 0.0, 100.0, 201);
    const ThermalCovariance sigma = [&] {
        auto c = read_covariance(cfg, sc, ts.back());
        cfg.reject_unknown();
        return c;
    }();
    if (ts.front() < 0.0) throw Error(ErrorKind::ConfigError, "forced needs t >= 0");
    const std::size_t n = ts.size();
    std::vector<double> mx(n), mp(n), dx(n), dp(n), sxx(n), sxp(n), spp(n), sl(n), sl0(n);
    parallel_for(n, [&](std::size_t i) {
        const double t = ts[i];
        const auto free = stage(at_t("evolve_cumulants", t), [&] { return evolve_cumulants(s0, t, sc.osc, sigma); });
        const auto st = stage(at_t("evolve_forced", t), [&] { return evolve_forced(s0, t, force, sc.osc, sigma); });
        mx[i] = st.mean[0];
        mp[i] = st.mean[1];
        dx[i] = st.mean[0] - free.mean[0];
        dp[i] = st.mean[1] - free.mean[1];
        sxx[i] = st.covariance(0, 0);
        sxp[i] = st.covariance(0, 1);
        spp[i] = st.covariance(1, 1);
        sl[i] = entropy_or_nan(st.covariance);
        sl0[i] = entropy_or_nan(free.covariance);
    });
    CsvTable out;
    out.add("t", ts);
    out.add("mean_x", mx);
    out.add("mean_p", mp);
    out.add("shift_x", dx);
    out.add("shift_p", dp);
    out.add("sigma_xx", sxx);
    out.add("sigma_xp", sxp);
    out.add("sigma_pp", spp);
    out.add("linear_entropy", sl);
    out.add("linear_entropy_unforced", sl0);
    return out;
}

CsvTable cmd_parametric(Config& cfg, Scenario& sc) {
    const FourierWignerState s0 = read_state(cfg);
    const std::string profile = cfg.text("parametric", "profile", "sinusoidal");
    const double m = sc.osc.mass(), w = sc.osc.omega_r(), g = sc.osc.gamma0();
    TimeDependentDrift drift;
    if (profile == "constant") {
        drift = TimeDependentDrift::constant(m, w, g);
    } else if (profile == "sinusoidal") {
        drift = TimeDependentDrift::sinusoidal(m, w, g, cfg.number("parametric", "a_gamma", 0.5),
                                               cfg.number("parametric", "nu", 1.0),
                                               cfg.number("parametric", "a_omega", 0.0));
    } else if (profile == "smoothed_step") {
        drift = TimeDependentDrift::smoothed_step(m, w, g, cfg.number("parametric", "gamma_end", 2.0 * g),
                                                  cfg.number("parametric", "t_step", 10.0),
                                                  cfg.number("parametric", "width", 1.0));
    } else {
        throw Error(ErrorKind::ConfigError, "parametric.profile must be constant, sinusoidal or smoothed_step");
    }
    const std::string dmode = cfg.text("parametric", "diffusion", "late");
    OdeTolerance tol;
    tol.rel = cfg.number("parametric", "rel_tol", tol.rel);
    tol.abs = cfg.number("parametric", "abs_tol", tol.abs);
    const auto ts = read_times(cfg, 0.0, 50.0, 101);
    cfg.reject_unknown();
    if (ts.front() < 0.0) throw Error(ErrorKind::ConfigError, "parametric needs t >= 0");
    if (dmode != "late" && dmode != "none") throw Error(ErrorKind::ConfigError, "parametric.diffusion must be late or none");
    Mat2 d = Mat2::Zero();
    if (dmode == "late" && g > 0.0)
        d = diffusion_matrix(stage("diffusion_late", [&] { return diffusion_late(sc.osc, sc.bath); }));

    const auto phi = stage("solve_transition", [&] { return solve_transition(drift, ts.back(), tol); });
    const std::size_t n = ts.size();
    std::vector<double> pxx(n), pxp(n), ppx(n), ppp(n), det(n), mx(n), mp(n), sxx(n), sxp(n), spp(n);
    parallel_for(n, [&](std::size_t i) {
        const double t = ts[i];
        const Mat2 f = stage(at_t("solve_transition", t), [&] { return phi.at(t); });
        const auto st = stage(at_t("solve_general", t),
                              [&] { return solve_general(s0, t, drift, [&](double) { return d; }, tol); });
        pxx[i] = f(0, 0);
        pxp[i] = f(0, 1);
        ppx[i] = f(1, 0);
        ppp[i] = f(1, 1);
        det[i] = f.determinant();
        mx[i] = st.mean[0];
        mp[i] = st.mean[1];
        sxx[i] = st.covariance(0, 0);
        sxp[i] = st.covariance(0, 1);
        spp[i] = st.covariance(1, 1);
    });
    CsvTable out;
    out.add("t", ts);
    out.add("phi_xx", pxx);
    out.add("phi_xp", pxp);
    out.add("phi_px", ppx);
    out.add("phi_pp", ppp);
    out.add("det_phi", det);
    out.add("mean_x", mx);
    out.add("mean_p", mp);
    out.add("sigma_xx", sxx);
    out.add("sigma_xp", sxp);
    out.add("sigma_pp", spp);
    return out;
}

}  // namespace

int run(const std::string& command, const std::string& config_text, const std::string& config_dir,
        const std::string& out_dir, std::ostream& err) {
    const auto& cmds = commands();
    if (std::find(cmds.begin(), cmds.end(), command) == cmds.end()) {
        err << "qbm: unknown command '" << command << "'\n";
        return exit_config;
    }
    CsvTable table;
    std::string name;
    std::string resolved;
    std::vector<std::string> warnings;
    try {
        thread_count();
        Config cfg(config_text);
        name = cfg.text("output", "name", command);
        if (name.empty() || name.find_first_of("/\\") != std::string::npos)
            throw Error(ErrorKind::ConfigError, "output.name must be a plain file stem");
        Scenario sc = [&] {
            try {
                return read_scenario(cfg);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::InvalidSpec) throw Error(ErrorKind::ConfigError, e.what());
                throw;
            }
        }();
        if (command == "coeffs") table = cmd_coeffs(cfg, sc);
        if (command == "evolve") table = cmd_evolve(cfg, sc);
        if (command == "compare") table = cmd_compare(cfg, sc);
        if (command == "sweep") table = cmd_sweep(cfg, sc);
        if (command == "forced") table = cmd_forced(cfg, sc, config_dir);
        if (command == "parametric") table = cmd_parametric(cfg, sc);
        resolved = cfg.resolved();
        warnings = sc.warnings;
    } catch (const StageFailure& e) {
        err << "qbm: " << e.what() << "\n";
        return exit_numerical;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) {
            err << "qbm: " << e.what() << "\n";
            return exit_io;
        }
        if (is_config_kind(e.kind())) {
            err << "qbm: config error: " << e.what() << "\n";
            return exit_config;
        }
        err << "qbm: " << command << " failed: " << e.what() << "\n";
        return exit_numerical;
    }
    for (const auto& w : warnings) err << "qbm: warning: " << w << "\n";

    try {
        fs::create_directories(out_dir);
        const fs::path csv = fs::path(out_dir) / (name + ".csv");
        emit_csv(table, csv.string());
        const fs::path side = fs::path(out_dir) / (name + ".provenance.ini");
        std::ofstream out(side, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot open " + side.string() + " for writing");
        out << "; resolved configuration for " << csv.filename().string() << "\n"
            << "[provenance]\nprogram = qbm\nversion = " << version << "\ncommand = " << command << "\n\n"
            << resolved;
        if (!out) throw Error(ErrorKind::IoError, "write failed for " + side.string());
    } catch (const std::exception& e) {
        err << "qbm: " << e.what() << "\n";
        return exit_io;
    }
    return exit_ok;
}

}  // namespace qbm::cli
