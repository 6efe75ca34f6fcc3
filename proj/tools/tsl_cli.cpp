// Batch driver: JSON experiment configs, per-operation subcommands, JSON/CSV artifacts.

#include <fftw3.h>

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "tsl/tsl.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tsl;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kConfigVersion = 1;

enum Exit { kOk = 0, kConfigFailure = 2, kPrecondition = 3, kDivergence = 4 };

// A step result that must be finite came out divergent.
class NumericDivergence : public Error {
public:
    explicit NumericDivergence(const std::string& what) : Error("NumericDivergence: " + what) {}
};

struct StepFailure {
    int code;
    std::string message;
};

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string read_file(const fs::path& p, const std::string& what) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw ConfigError(what + " not found: " + p.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// Inputs read while executing, hashed into the manifest.
struct Context {
    fs::path base;  // relative paths resolve against the config's directory
    fs::path out;
    std::uint64_t seed = 7;
    json inputs = json::array();

    fs::path resolve(const std::string& p) const {
        const fs::path q(p);
        return q.is_absolute() ? q : base / q;
    }
    std::string load(const std::string& p, const std::string& what) {
        const fs::path full = resolve(p);
        std::string bytes = read_file(full, what);
        inputs.push_back({{"path", full.string()}, {"fnv1a64", hex64(fnv1a(bytes))}});
        return bytes;
    }
    json load_json(const std::string& p, const std::string& what) {
        try {
            return json::parse(load(p, what));
        } catch (const json::parse_error& e) {
            throw ConfigError(what + " " + p + " is not valid JSON: " + e.what());
        }
    }
};

// ---- descriptor parsing ----

template <class T>
T field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
T required(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    return field<T>(j, key, T{});
}

double number_or_inf(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number or \"inf\"");
    return v.get<double>();
}

cplx complex_value(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("complex values are numbers or [re, im] pairs");
}

UniformGrid parse_grid(const json& j) {
    if (!j.is_object()) throw ConfigError("grid must be an object {lo, hi, n}");
    const int dim = field(j, "dim", 1);
    const double lo = required<double>(j, "lo"), hi = required<double>(j, "hi");
    const auto n = required<std::size_t>(j, "n");
    if (dim == 1) return UniformGrid::line(lo, hi, n);
    if (dim == 2) return UniformGrid::square(lo, hi, n);
    throw ConfigError("grid dimension must be 1 or 2");
}

ScaleLadder parse_ladder(const json& j) {
    if (!j.is_object()) throw ConfigError("ladder must be an object {y_min, y_max, per_decade|count}");
    const double a = required<double>(j, "y_min"), b = required<double>(j, "y_max");
    if (j.contains("count")) return ScaleLadder(a, b, required<std::size_t>(j, "count"));
    return ScaleLadder::per_decade(a, b, field(j, "per_decade", 10.0));
}

Kernel parse_kernel(const json& j, Context& ctx);

// "name" or "name:a,b" shorthand for catalog entries.
Kernel catalog_shorthand(const std::string& s) {
    const auto colon = s.find(':');
    const std::string name = s.substr(0, colon);
    CatalogParams p;
    if (colon != std::string::npos) {
        std::vector<double> args;
        std::stringstream ss(s.substr(colon + 1));
        for (std::string tok; std::getline(ss, tok, ',');) args.push_back(std::stod(tok));
        if (name == "annular-exp" && !args.empty()) p.tau0 = args[0];
        if (name == "s0-bump") {
            if (args.size() > 0) p.center = args[0];
            if (args.size() > 1) p.width = args[1];
            if (args.size() > 2) p.dim = static_cast<int>(args[2]);
        }
        if (name == "gaussian-heat" && !args.empty()) p.dim = static_cast<int>(args[0]);
    }
    return catalog(name, p);
}

Kernel parse_kernel(const json& j, Context& ctx) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s.size() > 5 && s.ends_with(".json")) return parse_kernel(ctx.load_json(s, "kernel descriptor"), ctx);
        return catalog_shorthand(s);
    }
    if (!j.is_object()) throw ConfigError("kernel must be a catalog name or a descriptor object");
    if (j.contains("catalog")) {
        CatalogParams p;
        p.dim = field(j, "dim", p.dim);
        p.tau0 = field(j, "tau0", p.tau0);
        p.center = field(j, "center", p.center);
        p.width = field(j, "width", p.width);
        return catalog(required<std::string>(j, "catalog"), p);
    }
    if (j.contains("file")) {
        const auto path = required<std::string>(j, "file");
        std::istringstream is(ctx.load(path, "kernel file"));
        const GridData d = read_tbrg(is);
        const bool complex = field(j, "complex", d.components == 2);
        if (d.components != (complex ? 2u : 1u)) throw ConfigError("kernel file " + path + " must hold one real or one complex component");
        CVec v(d.grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = complex ? cplx(d.at(i, 0), d.at(i, 1)) : cplx(d.at(i, 0));
        return Kernel::from_samples(field<std::string>(j, "name", fs::path(path).stem().string()), d.grid, std::move(v),
                                    field(j, "moment_order", 4));
    }
    throw ConfigError("kernel descriptor needs 'catalog' or 'file'");
}

Signal parse_signal(const json& jin, const UniformGrid& grid, Context& ctx) {
    const json j = jin.is_string() ? ctx.load_json(jin.get<std::string>(), "signal descriptor") : jin;
    if (!j.is_object()) throw ConfigError("signal must be a descriptor object or a path to one");
    const int dim = field(j, "dim", grid.dimension());
    const auto m = field<std::size_t>(j, "components", 1);
    Signal s(dim, m);
    auto vec = [&](const json& v) {
        CVec out;
        if (v.is_array() && !v.empty() && (v[0].is_array() || m > 1))
            for (const auto& e : v) out.push_back(complex_value(e));
        else
            out.push_back(complex_value(v));
        if (out.size() != m) throw ConfigError("value has " + std::to_string(out.size()) + " components, expected " + std::to_string(m));
        return out;
    };
    for (const auto& d : j.value("diracs", json::array()))
        s.add_dirac({{field(d, "x", 0.0), field(d, "x2", 0.0)}, {field(d, "order", 0), field(d, "order2", 0)},
                     vec(d.value("weight", json(1.0)))});
    for (const auto& p : j.value("poly", json::array()))
        s.add_poly({{required<int>(p, "power"), field(p, "power2", 0)}, vec(p.value("coeff", json(1.0)))});
    for (const auto& w : j.value("waves", json::array()))
        s.add_wave({{required<double>(w, "omega"), field(w, "omega2", 0.0)}, vec(w.value("amplitude", json(1.0)))});
    if (j.contains("smooth")) {
        const json& sm = j.at("smooth");
        const bool waive = field(sm, "waive_edges", false);
        if (sm.contains("file")) {
            const auto path = required<std::string>(sm, "file");
            std::istringstream is(ctx.load(path, "signal file"));
            const GridData d = read_tbrg(is);
            if (!(d.grid == grid)) throw ConfigError("signal file " + path + " is not sampled on the step grid");
            const bool complex = field(sm, "complex", false);
            if (d.components != (complex ? 2 * m : m)) throw ConfigError("signal file " + path + " has the wrong component count");
            std::vector<CVec> comps(m, CVec(grid.size()));
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t i = 0; i < grid.size(); ++i)
                    comps[c][i] = complex ? cplx(d.at(i, 2 * c), d.at(i, 2 * c + 1)) : cplx(d.at(i, c));
            s.add_smooth(grid, std::move(comps), waive);
        } else {
            if (m != 1) throw ConfigError("built-in smooth parts are scalar");
            const auto kind = required<std::string>(sm, "builtin");
            const double a = field(sm, "amplitude", 1.0);
            Signal b;
            if (kind == "gaussian-bump") {
                b = gaussian_bump_signal(grid, field(sm, "center", 0.0), field(sm, "width", 1.0));
            } else if (kind == "heaviside") {
                b = heaviside_signal(grid);
            } else if (kind == "windowed-cosine") {
                const double om = field(sm, "omega", 1.0), win = field(sm, "window", 12.0);
                b = sampled_signal(grid, [=](const Point& x) { return cplx(std::cos(om * x[0]) * std::exp(-x[0] * x[0] / (win * win))); });
            } else if (kind == "kernel") {
                b = kernel_signal(parse_kernel(sm.at("kernel"), ctx), grid);
            } else {
                throw ConfigError("unknown built-in smooth part '" + kind + "'");
            }
            s.add_smooth(grid, {b.smooth()->components[0]}, waive || b.smooth_edge_waived());
            if (a != 1.0) s = s.scaled(a);
        }
    }
    return s;
}

NormSpec parse_space(const std::string& s) {
    if (s == "cb") return NormSpec::cb();
    if (s == "uc") return NormSpec::uc();
    if (s.rfind("lp:", 0) == 0) {
        const std::string p = s.substr(3);
        return NormSpec::lp(p == "inf" ? std::numeric_limits<double>::infinity() : std::stod(p));
    }
    if (s.rfind("wsup:", 0) == 0) return NormSpec::weighted_sup(std::stod(s.substr(5)));
    throw ConfigError("space must be lp:<p>, cb, uc or wsup:<N>");
}

RegVarWeight parse_weight(const json& j) {
    if (j.is_number()) return RegVarWeight::power(j.get<double>());
    if (!j.is_object()) throw ConfigError("weight must be a number (alpha) or {alpha, beta}");
    const double alpha = required<double>(j, "alpha");
    const double beta = field(j, "beta", 0.0);
    return beta == 0.0 ? RegVarWeight::power(alpha) : RegVarWeight::log_power(alpha, beta);
}

HeatSymbol parse_symbol(const json& j, int dim) {
    if (j.is_null()) return HeatSymbol::laplacian(dim);
    HeatSymbol P{dim, required<int>(j, "degree"), {}};
    for (const auto& c : j.at("coefficients"))
        P.coefficients.push_back({{required<int>(c, "a"), field(c, "b", 0)}, complex_value(c.at("c"))});
    P.validate();
    return P;
}

json cjson(cplx v) { return json::array({v.real(), v.imag()}); }

std::ofstream open_out(const Context& ctx, const std::string& file) {
    std::ofstream os(ctx.out / file);
    if (!os) throw ConfigError("cannot write " + (ctx.out / file).string());
    os << std::setprecision(17);
    return os;
}

void write_json(const Context& ctx, const std::string& file, const json& j) { open_out(ctx, file) << j.dump(2) << '\n'; }

// ---- steps ----

json step_analyze_kernel(const json& s, Context& ctx) {
    const Kernel k = parse_kernel(s.at("kernel"), ctx);
    const KernelReport r = analyze_kernel(k);
    json moments = json::array();
    for (const auto& m : r.moments) moments.push_back({{"a", m.index.a}, {"b", m.index.b}, {"value", cjson(m.value)}});
    json out{{"kernel", k.name()}, {"dimension", k.dimension()}, {"nondegenerate", r.nondegenerate}};
    out["tau"] = r.tau ? json(*r.tau) : json(nullptr);
    out["tau_uncertainty"] = r.tau_uncertainty;
    out["strong"] = r.strong ? json{{"N", r.strong->order}, {"C", r.strong->constant}, {"r", r.strong->radius}} : json(nullptr);
    out["first_nonvanishing_moment_order"] = r.first_nonvanishing_moment_order ? json(*r.first_nonvanishing_moment_order) : json(nullptr);
    out["moments"] = moments;
    return out;
}

json step_transform(const json& s, Context& ctx, const std::string& name) {
    const UniformGrid grid = parse_grid(s.at("grid"));
    const ScaleLadder ladder = parse_ladder(s.at("ladder"));
    const Signal f = parse_signal(s.at("signal"), grid, ctx);
    const Kernel k = parse_kernel(s.at("kernel"), ctx);
    const bool wavelet = field(s, "wavelet", false);
    const ScaleField w = wavelet ? wavelet_transform(f, k, grid, ladder, name) : regularize(f, k, grid, ladder, name);
    auto csv = open_out(ctx, name + "_scales.csv");
    csv << "y,l2,sup\n";
    json scales = json::array();
    for (std::size_t j = 0; j < ladder.size(); ++j) {
        const double l2 = w.scale_norm(j, NormSpec::lp(2.0)), sup = w.scale_norm(j, NormSpec::cb());
        csv << ladder[j] << ',' << l2 << ',' << sup << '\n';
        scales.push_back(ladder[j]);
    }
    json out{{"kernel", k.name()}, {"wavelet", wavelet}, {"ladder", scales}, {"finite", w.finite()}};
    if (field(s, "growth_fit", false)) {
        const GrowthFit g = slow_growth_fit(w);
        out["growth_fit"] = {{"k", g.k}, {"l", g.l}, {"C", std::isfinite(g.C) ? json(g.C) : json(nullptr)}};
    }
    if (field(s, "write_field", false)) {
        GridData d{grid, static_cast<std::uint32_t>(2 * ladder.size() * w.components), {}};
        d.values.reserve(grid.size() * d.components);
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < ladder.size(); ++j)
                for (std::size_t c = 0; c < w.components; ++c) {
                    d.values.push_back(w.values[j][c][i].real());
                    d.values.push_back(w.values[j][c][i].imag());
                }
        write_tbrg_file((ctx.out / (name + ".tbrg")).string(), d);
        out["field_file"] = name + ".tbrg";
    }
    return out;
}

json step_reconstruct(const json& s, Context& ctx, const std::string& name) {
    const UniformGrid grid = parse_grid(s.at("grid"));
    const ScaleLadder ladder = parse_ladder(s.at("ladder"));
    const Signal f = parse_signal(s.at("signal"), grid, ctx);
    const Kernel psi = parse_kernel(s.at("psi"), ctx);
    const json eta_j = s.value("eta", json("auto"));
    Kernel eta;
    if (eta_j == "auto") {
        eta = reconstruction_wavelet(psi, Annulus::around(annulus_radius(psi)));
    } else if (eta_j.is_object() && eta_j.contains("annulus")) {
        // {"annulus": [inner, outer]}: reconstruction wavelet of psi on that annulus
        const auto a = eta_j.at("annulus").get<std::vector<double>>();
        if (a.size() != 2) throw ConfigError("annulus needs [inner, outer]");
        eta = reconstruction_wavelet(psi, Annulus{a[0], a[1]});
    } else {
        eta = parse_kernel(eta_j, ctx);
    }
    const auto r = reconstruct(f, psi, eta, grid, ladder, field(s, "truncation_tolerance", kLadderTruncation));
    const auto ref = without_poly(f).evaluate_on(grid, false);
    auto csv = open_out(ctx, name + ".csv");
    csv << "x,f_re,f_im,rec_re,rec_im\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv << grid.point(i)[0] << ',' << ref[0][i].real() << ',' << ref[0][i].imag() << ',' << r.f_rec[0][i].real() << ','
            << r.f_rec[0][i].imag() << '\n';
    return {{"psi", psi.name()}, {"eta", eta.name()}, {"relative_error", r.relative_error},
            {"calibration", cjson(r.calibration)}, {"poly_excluded", r.poly_excluded},
            {"bottom_ratio", r.bottom_ratio}, {"top_ratio", r.top_ratio}};
}

json step_class_estimate(const json& s, Context& ctx, const std::string& name) {
    const UniformGrid grid = parse_grid(s.at("grid"));
    const ScaleLadder ladder = parse_ladder(s.at("ladder"));
    const Signal f = parse_signal(s.at("signal"), grid, ctx);
    const Kernel phi = parse_kernel(s.at("kernel"), ctx);
    const std::string mode_s = field<std::string>(s, "mode", "global");
    if (mode_s != "global" && mode_s != "local") throw ConfigError("mode must be global or local");
    const std::string meas = field<std::string>(s, "measure", "integral");
    if (meas != "integral" && meas != "sup") throw ConfigError("measure must be integral or sup");
    VerdictOptions opt;
    if (s.contains("avg_kernel") && !s.at("avg_kernel").is_null()) opt.phi0 = parse_kernel(s.at("avg_kernel"), ctx);
    opt.measure = meas == "sup" ? SpatialMeasure::Sup : SpatialMeasure::Integral;
    opt.k_max = field(s, "k_max", opt.k_max);
    opt.l_max = field(s, "l_max", opt.l_max);
    const auto r = tauberian_verdict(f, phi, parse_space(field<std::string>(s, "space", "cb")),
                                     mode_s == "local" ? EstimateMode::Local : EstimateMode::Global, grid, ladder, opt);
    auto csv = open_out(ctx, name + "_table.csv");
    csv << "k,l,value,divergent\n";
    for (const auto& c : r.table) csv << c.k << ',' << c.l << ',' << c.integral.value << ',' << c.integral.divergent << '\n';
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    json out{{"mode", mode_s}, {"k", r.k}, {"l", r.l}, {"C", r.C}, {"correction", r.correction_kind},
             {"residual_norm_E", r.residual_norm_E}, {"checks", checks}, {"self_check", r.self_check},
             {"accepted", r.accepted}, {"verdict", r.verdict}};
    if (!r.accepted) throw HypothesisFailure("verdict rejected: " + r.verdict);
    return out;
}

LPPair parse_pair(const json& s, const char* k0, const char* k1, double order, Context& ctx) {
    return LPPair(parse_kernel(s.at(k0), ctx), parse_kernel(s.at(k1), ctx), order);
}

json step_besov(const json& s, Context& ctx, const std::string& name) {
    const UniformGrid grid = parse_grid(s.at("grid"));
    const ScaleLadder ladder = parse_ladder(s.at("ladder"));
    const Signal f = parse_signal(s.at("signal"), grid, ctx);
    const LPPair pair = parse_pair(s, "pair0", "pair", required<double>(s, "order"), ctx);
    const double p = number_or_inf(s, "p", 2.0), q = number_or_inf(s, "q", 2.0);
    const auto r = besov_norm(f, pair, p, q, parse_weight(s.value("weight", json(pair.alpha))), grid, ladder);
    auto csv = open_out(ctx, name + "_scales.csv");
    csv << "y,scale_norm,weighted\n";
    for (const auto& row : r.table) csv << row.y << ',' << row.scale_norm << ',' << row.weighted << '\n';
    json out{{"norm", r.norm}, {"low_part", r.low}, {"scale_part", r.j_part}, {"divergent", r.divergent}};
    if (std::isinf(p)) out["uc_probe"] = r.uc_probe;
    if (r.divergent) {
        write_json(ctx, name + ".json", out);
        throw NumericDivergence("scale integral diverges as y -> 0");
    }
    return out;
}

json step_besov_equiv(const json& s, Context& ctx) {
    const UniformGrid grid = parse_grid(s.at("grid"));
    const ScaleLadder ladder = parse_ladder(s.at("ladder"));
    const double order = required<double>(s, "order");
    std::vector<Signal> fs;
    json names = json::array();
    if (s.contains("signal_dir")) {
        std::vector<fs::path> files;
        const fs::path dir = ctx.resolve(required<std::string>(s, "signal_dir"));
        if (!fs::is_directory(dir)) throw ConfigError("signal directory not found: " + dir.string());
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) {
            fs.push_back(parse_signal(json(p.string()), grid, ctx));
            names.push_back(p.filename().string());
        }
    }
    for (const auto& d : s.value("signals", json::array())) {
        fs.push_back(parse_signal(d, grid, ctx));
        names.push_back(d.is_string() ? d : json("inline"));
    }
    if (fs.empty()) throw ConfigError("besov-equiv needs 'signals' or 'signal_dir'");
    const LPPair A = parse_pair(s.at("pair_a"), "phi0", "phi", order, ctx);
    const LPPair B = parse_pair(s.at("pair_b"), "phi0", "phi", order, ctx);
    const auto r = besov_equivalence(fs, A, B, number_or_inf(s, "p", 2.0), number_or_inf(s, "q", 2.0),
                                     parse_weight(s.value("weight", json(order))), grid, ladder, field(s, "threshold", 10.0));
    return {{"signals", names}, {"ratios", r.ratios}, {"min", r.min}, {"max", r.max}, {"spread", r.spread}, {"bounded", r.bounded}};
}

json step_heat_demo(const json& s, Context& ctx, const std::string& name) {
    const UniformGrid grid = parse_grid(s.at("grid"));
    const Signal f = parse_signal(s.at("signal"), grid, ctx);
    const HeatSymbol P = parse_symbol(s.value("symbol", json(nullptr)), grid.dimension());
    const auto r = heat_as_regularization(f, required<double>(s, "t"), P, grid);
    auto csv = open_out(ctx, name + ".csv");
    csv << (grid.dimension() == 1 ? "x" : "x1,x2") << ",evolved_re,evolved_im,regularized_re,regularized_im\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.point(i);
        csv << x[0];
        if (grid.dimension() == 2) csv << ',' << x[1];
        csv << ',' << r.evolved[0][i].real() << ',' << r.evolved[0][i].imag() << ',' << r.regularized[0][i].real() << ','
            << r.regularized[0][i].imag() << '\n';
    }
    return {{"t", r.t}, {"y", r.y}, {"discrepancy", r.discrepancy}};
}

json step_laplace_demo(const json& s, Context& ctx, const std::string& name) {
    const json gj = s.value("grid", json{{"lo", -64.0}, {"hi", 64.0}, {"n", 65536}});
    const UniformGrid grid = parse_grid(gj);
    const Signal h = parse_signal(s.at("signal"), grid, ctx);
    const auto xs = s.value("x", std::vector<double>{0.0, 1.0});
    const auto sigmas = s.value("sigma", std::vector<double>{0.5, 1.0});
    if (xs.empty() || sigmas.empty()) throw ConfigError("laplace-demo needs x and sigma values");
    auto csv = open_out(ctx, name + ".csv");
    csv << "x,sigma,direct_re,direct_im,regularized_re,regularized_im,discrepancy\n";
    double worst = 0.0;
    bool agree = true;
    for (double sg : sigmas)
        for (double x : xs) {
            const auto r = laplace_transform_cone(h, x, sg);
            csv << x << ',' << sg << ',' << r.direct[0].real() << ',' << r.direct[0].imag() << ',' << r.regularized[0].real()
                << ',' << r.regularized[0].imag() << ',' << r.discrepancy << '\n';
            worst = std::max(worst, r.discrepancy);
            agree = agree && r.agree;
        }
    const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
    const auto [slo, shi] = std::minmax_element(sigmas.begin(), sigmas.end());
    double cr = 0.0;
    if (*xhi > *xlo && *shi > *slo) cr = cauchy_riemann_residual(h, *xlo, *xhi, *slo, *shi);
    return {{"max_discrepancy", worst}, {"agree", agree}, {"cauchy_riemann_residual", cr}};
}

const std::vector<std::string> kOps = {"analyze-kernel", "transform", "reconstruct", "class-estimate",
                                       "besov", "besov-equiv", "heat-demo", "laplace-demo"};

json execute_step(const json& s, Context& ctx, const std::string& name) {
    const auto op = required<std::string>(s, "op");
    if (op == "analyze-kernel") return step_analyze_kernel(s, ctx);
    if (op == "transform") return step_transform(s, ctx, name);
    if (op == "reconstruct") return step_reconstruct(s, ctx, name);
    if (op == "class-estimate") return step_class_estimate(s, ctx, name);
    if (op == "besov") return step_besov(s, ctx, name);
    if (op == "besov-equiv") return step_besov_equiv(s, ctx);
    if (op == "heat-demo") return step_heat_demo(s, ctx, name);
    if (op == "laplace-demo") return step_laplace_demo(s, ctx, name);
    throw ConfigError("unknown op '" + op + "'");
}

void validate_config(const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    if (!cfg.contains("version") || !cfg["version"].is_number_integer() || cfg["version"].get<int>() != kConfigVersion)
        throw ConfigError("config 'version' must be " + std::to_string(kConfigVersion));
    if (!cfg.contains("output_dir") || !cfg["output_dir"].is_string()) throw ConfigError("config needs a string 'output_dir'");
    if (!cfg.contains("pipeline") || !cfg["pipeline"].is_array()) throw ConfigError("config needs a 'pipeline' array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cfg["pipeline"].size(); ++i) {
        const auto& s = cfg["pipeline"][i];
        if (!s.is_object() || !s.contains("op") || !s["op"].is_string())
            throw ConfigError("pipeline step " + std::to_string(i) + " needs an 'op'");
        if (std::find(kOps.begin(), kOps.end(), s["op"].get<std::string>()) == kOps.end())
            throw ConfigError("pipeline step " + std::to_string(i) + ": unknown op '" + s["op"].get<std::string>() + "'");
        const std::string name = s.value("name", "step" + std::to_string(i));
        if (!seen.insert(name).second) throw ConfigError("duplicate step name '" + name + "'");
    }
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kConfigFailure;
    if (dynamic_cast<const NumericDivergence*>(&e) || dynamic_cast<const LadderTruncationError*>(&e)) return kDivergence;
    return kPrecondition;
}

// Runs the pipeline and writes <output_dir>/manifest.json. Returns the exit code.
int run_config(const json& cfg, const fs::path& base, const std::string& config_bytes) {
    validate_config(cfg);
    Context ctx;
    ctx.base = base;
    ctx.out = ctx.resolve(cfg["output_dir"].get<std::string>());
    ctx.seed = cfg.value("seed", std::uint64_t{7});
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + ctx.out.string());

    json manifest{{"tool", "tsl_cli"},
                  {"tool_version", kToolVersion},
                  {"fftw_version", std::string(fftw_version)},
                  {"config_version", kConfigVersion},
                  {"config_fnv1a64", hex64(fnv1a(config_bytes))},
                  {"seed", ctx.seed},
                  {"steps", json::array()}};
    int code = kOk;
    std::string failure;
    const auto& pipeline = cfg["pipeline"];
    for (std::size_t i = 0; i < pipeline.size(); ++i) {
        const auto& s = pipeline[i];
        const std::string name = s.value("name", "step" + std::to_string(i));
        json entry{{"name", name}, {"op", s["op"]}};
        try {
            const json out = execute_step(s, ctx, name);
            write_json(ctx, name + ".json", out);
            entry["status"] = "ok";
            entry["report"] = name + ".json";
        } catch (const std::exception& e) {
            code = exit_code_for(e);
            entry["status"] = "failed";
            entry["error"] = e.what();
            failure = StepError("step '" + name + "': " + e.what()).what();
            manifest["steps"].push_back(entry);
            break;
        }
        manifest["steps"].push_back(entry);
    }
    manifest["inputs"] = ctx.inputs;
    manifest["exit_code"] = code;
    write_json(ctx, "manifest.json", manifest);
    if (code != kOk) std::cerr << failure << '\n';
    return code;
}

// Subcommands wrap their flags into a one-step config.
int run_single(json step, const std::string& out_dir) {
    json cfg{{"version", kConfigVersion}, {"output_dir", out_dir}, {"pipeline", json::array({std::move(step)})}};
    const std::string bytes = cfg.dump();
    return run_config(cfg, fs::current_path(), bytes);
}

json parse_json_arg(const std::string& s) {
    if (s.empty()) return nullptr;
    if (s.front() == '{' || s.front() == '[') {
        try {
            return json::parse(s);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("inline JSON argument is invalid: ") + e.what());
        }
    }
    return s;  // a catalog name or a path
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularizing transforms, class estimates and Besov norms driver"};
    app.require_subcommand(1);
    std::string out_dir = "tsl_out";
    std::string grid_s = R"({"lo":-64,"hi":64,"n":8192})", ladder_s = R"({"y_min":0.02,"y_max":50,"per_decade":10})";
    std::string signal_s, kernel_s;
    json step;

    auto common = [&](CLI::App* sub, bool with_grid) {
        sub->add_option("--out", out_dir, "artifact directory")->capture_default_str();
        if (with_grid) {
            sub->add_option("--grid", grid_s, "grid JSON {lo, hi, n[, dim]}")->capture_default_str();
            sub->add_option("--ladder", ladder_s, "ladder JSON {y_min, y_max, per_decade|count}")->capture_default_str();
        }
    };

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute a JSON experiment config (steps run in order, manifest written)");
    run->add_option("config", config_path, "config file")->required();

    auto* ak = app.add_subcommand("analyze-kernel", "kernels: analyze_kernel -> KernelReport JSON");
    ak->add_option("--kernel", kernel_s, "catalog name (name:args) or descriptor .json")->required();
    common(ak, false);

    bool wavelet = false, growth = false, write_field = false;
    auto* tr = app.add_subcommand("transform", "transform: regularize (or wavelet_transform) -> per-scale CSV");
    tr->add_option("--signal", signal_s, "signal descriptor (.json path or inline JSON)")->required();
    tr->add_option("--kernel", kernel_s, "kernel")->required();
    tr->add_flag("--wavelet", wavelet, "use the wavelet transform");
    tr->add_flag("--growth-fit", growth, "fit slow growth (k, l)");
    tr->add_flag("--write-field", write_field, "write the field as TBRG1");
    common(tr, true);

    std::string eta_s = "auto";
    double trunc = kLadderTruncation;
    auto* rc = app.add_subcommand("reconstruct", "synthesis: wavelet transform + synthesis -> error report JSON");
    rc->add_option("--signal", signal_s, "signal descriptor")->required();
    rc->add_option("--psi", kernel_s, "analyzing wavelet")->required();
    rc->add_option("--eta", eta_s, "reconstruction wavelet, 'auto' or {\"annulus\": [inner, outer]}")->capture_default_str();
    rc->add_option("--truncation-tolerance", trunc, "end-slice mass tolerance")->capture_default_str();
    common(rc, true);

    std::string mode = "global", space = "cb", measure = "integral", avg_s;
    int k_max = 12, l_max = 12;
    auto* ce = app.add_subcommand("class-estimate", "class_estimates: tauberian_verdict -> report JSON + (k,l) CSV");
    ce->add_option("--signal", signal_s, "signal descriptor")->required();
    ce->add_option("--kernel", kernel_s, "regularizing kernel")->required();
    ce->add_option("--avg-kernel", avg_s, "averaging kernel phi0");
    ce->add_option("--mode", mode, "global or local")->capture_default_str();
    ce->add_option("--space", space, "lp:<p>, cb, uc or wsup:<N>")->capture_default_str();
    ce->add_option("--measure", measure, "integral or sup over |x| blocks")->capture_default_str();
    ce->add_option("--k-max", k_max)->capture_default_str();
    ce->add_option("--l-max", l_max)->capture_default_str();
    common(ce, true);

    std::string pair0_s, pair_s, p_s = "2", q_s = "2", weight_s;
    double order = 0.5;
    auto* bs = app.add_subcommand("besov", "regvar_besov: besov_norm -> norm JSON + per-scale CSV");
    bs->add_option("--signal", signal_s, "signal descriptor")->required();
    bs->add_option("--pair0", pair0_s, "low-pass kernel phi0")->required();
    bs->add_option("--pair", pair_s, "band kernel phi")->required();
    bs->add_option("--order", order, "LP-pair order alpha")->capture_default_str();
    bs->add_option("--p", p_s, "spatial exponent (number or inf)")->capture_default_str();
    bs->add_option("--q", q_s, "scale exponent (number or inf)")->capture_default_str();
    bs->add_option("--weight", weight_s, "weight alpha or JSON {alpha, beta}; defaults to the order");
    common(bs, true);

    std::string dir_s, pairA0, pairA, pairB0, pairB;
    auto* be = app.add_subcommand("besov-equiv", "regvar_besov: besov_equivalence over a signal directory");
    be->add_option("--signal-dir", dir_s, "directory of signal descriptors")->required();
    be->add_option("--pair-a", pairA0, "phi0 of pair A")->required();
    be->add_option("--pair-a-phi", pairA, "phi of pair A")->required();
    be->add_option("--pair-b", pairB0, "phi0 of pair B")->required();
    be->add_option("--pair-b-phi", pairB, "phi of pair B")->required();
    be->add_option("--order", order)->capture_default_str();
    be->add_option("--p", p_s)->capture_default_str();
    be->add_option("--q", q_s)->capture_default_str();
    common(be, true);

    double t = 0.25;
    auto* hd = app.add_subcommand("heat-demo", "pde_examples: heat_as_regularization -> comparison CSV");
    hd->add_option("--signal", signal_s, "signal descriptor")->required();
    hd->add_option("--t", t, "evolution time")->capture_default_str();
    common(hd, true);

    std::vector<double> xs{0.0, 1.0}, sigmas{0.5, 1.0};
    auto* ld = app.add_subcommand("laplace-demo", "pde_examples: laplace_transform_cone -> comparison CSV");
    ld->add_option("--signal", signal_s, "cone-supported signal descriptor")->required();
    ld->add_option("--x", xs, "real parts")->capture_default_str();
    ld->add_option("--sigma", sigmas, "imaginary parts")->capture_default_str();
    std::string lgrid = R"({"lo":-64,"hi":64,"n":65536})";
    ld->add_option("--grid", lgrid, "grid JSON for smooth parts")->capture_default_str();
    ld->add_option("--out", out_dir, "artifact directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const fs::path cp(config_path);
            const std::string bytes = read_file(cp, "config");
            json cfg;
            try {
                cfg = json::parse(bytes);
            } catch (const json::parse_error& e) {
                throw ConfigError("config is not valid JSON: " + std::string(e.what()));
            }
            return run_config(cfg, cp.has_parent_path() ? cp.parent_path() : fs::current_path(), bytes);
        }
        const json grid = parse_json_arg(grid_s), ladder = parse_json_arg(ladder_s);
        if (ak->parsed()) return run_single({{"name", "analyze-kernel"}, {"op", "analyze-kernel"}, {"kernel", parse_json_arg(kernel_s)}}, out_dir);
        if (tr->parsed())
            return run_single({{"name", "transform"}, {"op", "transform"}, {"signal", parse_json_arg(signal_s)},
                               {"kernel", parse_json_arg(kernel_s)}, {"grid", grid}, {"ladder", ladder},
                               {"wavelet", wavelet}, {"growth_fit", growth}, {"write_field", write_field}},
                              out_dir);
        if (rc->parsed())
            return run_single({{"name", "reconstruct"}, {"op", "reconstruct"}, {"signal", parse_json_arg(signal_s)},
                               {"psi", parse_json_arg(kernel_s)}, {"eta", parse_json_arg(eta_s)}, {"grid", grid},
                               {"ladder", ladder}, {"truncation_tolerance", trunc}},
                              out_dir);
        if (ce->parsed())
            return run_single({{"name", "class-estimate"}, {"op", "class-estimate"}, {"signal", parse_json_arg(signal_s)},
                               {"kernel", parse_json_arg(kernel_s)}, {"avg_kernel", parse_json_arg(avg_s)}, {"mode", mode},
                               {"space", space}, {"measure", measure}, {"k_max", k_max}, {"l_max", l_max},
                               {"grid", grid}, {"ladder", ladder}},
                              out_dir);
        auto pq = [](const std::string& v) { return v == "inf" ? json("inf") : json(std::stod(v)); };
        if (bs->parsed()) {
            json s{{"name", "besov"}, {"op", "besov"}, {"signal", parse_json_arg(signal_s)}, {"pair0", parse_json_arg(pair0_s)},
                   {"pair", parse_json_arg(pair_s)}, {"order", order}, {"p", pq(p_s)}, {"q", pq(q_s)},
                   {"grid", grid}, {"ladder", ladder}};
            if (!weight_s.empty()) s["weight"] = weight_s.front() == '{' ? parse_json_arg(weight_s) : json(std::stod(weight_s));
            return run_single(s, out_dir);
        }
        if (be->parsed())
            return run_single({{"name", "besov-equiv"}, {"op", "besov-equiv"},
                               {"signal_dir", fs::absolute(dir_s).string()},
                               {"pair_a", {{"phi0", parse_json_arg(pairA0)}, {"phi", parse_json_arg(pairA)}}},
                               {"pair_b", {{"phi0", parse_json_arg(pairB0)}, {"phi", parse_json_arg(pairB)}}},
                               {"order", order}, {"p", pq(p_s)}, {"q", pq(q_s)}, {"grid", grid}, {"ladder", ladder}},
                              out_dir);
        if (hd->parsed())
            return run_single({{"name", "heat-demo"}, {"op", "heat-demo"}, {"signal", parse_json_arg(signal_s)}, {"t", t}, {"grid", grid}},
                              out_dir);
        if (ld->parsed())
            return run_single({{"name", "laplace-demo"}, {"op", "laplace-demo"}, {"signal", parse_json_arg(signal_s)},
                               {"x", xs}, {"sigma", sigmas}, {"grid", parse_json_arg(lgrid)}},
                              out_dir);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return exit_code_for(e);
    }
    return kOk;
}
