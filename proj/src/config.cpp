#include "stemdde/config.hpp"

#include "stemdde/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace stemdde {

using nlohmann::json;

namespace {

double need_number(const json& j, const std::string& ctx, const std::string& field) {
    if (!j.contains(field)) throw ConfigError(ctx + ": missing field \"" + field + "\"");
    if (!j.at(field).is_number()) throw ConfigError(ctx + ": field \"" + field + "\" must be a number");
    return j.at(field).get<double>();
}

int need_int(const json& j, const std::string& ctx, const std::string& field) {
    if (!j.contains(field)) throw ConfigError(ctx + ": missing field \"" + field + "\"");
    return j.at(field).get<int>();
}

std::string need_string(const json& j, const std::string& ctx, const std::string& field) {
    if (!j.contains(field)) throw ConfigError(ctx + ": missing field \"" + field + "\"");
    return j.at(field).get<std::string>();
}

json scalar_to_json(const ScalarRate& r) {
    switch (r.family) {
    case ScalarFamily::constant: return {{"family", "constant"}, {"c", r.c}};
    case ScalarFamily::affine: return {{"family", "affine"}, {"a", r.a}, {"b", r.b}};
    case ScalarFamily::hill: return {{"family", "hill"}, {"c", r.c}, {"k", r.k}, {"n", r.n}};
    case ScalarFamily::exp_decay: return {{"family", "exp_decay"}, {"c", r.c}, {"r", r.r}};
    }
    return {};
}

ScalarRate scalar_from_json(const json& j, const std::string& ctx) {
    const std::string fam = need_string(j, ctx, "family");
    if (fam == "constant") return ScalarRate::make_constant(need_number(j, ctx, "c"));
    if (fam == "affine")
        return ScalarRate::make_affine(need_number(j, ctx, "a"), need_number(j, ctx, "b"));
    if (fam == "hill")
        return ScalarRate::make_hill(need_number(j, ctx, "c"), need_number(j, ctx, "k"),
                                     need_int(j, ctx, "n"));
    if (fam == "exp_decay")
        return ScalarRate::make_exp_decay(need_number(j, ctx, "c"), need_number(j, ctx, "r"));
    throw ConfigError(ctx + ": unknown scalar family \"" + fam + "\"");
}

json planar_to_json(const PlanarRate& r) {
    switch (r.family) {
    case PlanarFamily::constant: return {{"family", "constant"}, {"c", r.c}};
    case PlanarFamily::affine_x: return {{"family", "affine_x"}, {"a", r.a}, {"b", r.b}};
    case PlanarFamily::hill_y:
        return {{"family", "hill_y"}, {"base", r.base}, {"amp", r.amp}, {"k", r.k}, {"n", r.n}};
    case PlanarFamily::separable:
        return {{"family", "separable"}, {"fx", scalar_to_json(r.fx)}, {"fy", scalar_to_json(r.fy)}};
    }
    return {};
}

PlanarRate planar_from_json(const json& j, const std::string& ctx) {
    const std::string fam = need_string(j, ctx, "family");
    if (fam == "constant") return PlanarRate::make_constant(need_number(j, ctx, "c"));
    if (fam == "affine_x")
        return PlanarRate::make_affine_x(need_number(j, ctx, "a"), need_number(j, ctx, "b"));
    if (fam == "hill_y")
        return PlanarRate::make_hill_y(need_number(j, ctx, "base"), need_number(j, ctx, "amp"),
                                       need_number(j, ctx, "k"), need_int(j, ctx, "n"));
    if (fam == "separable") {
        if (!j.contains("fx") || !j.contains("fy"))
            throw ConfigError(ctx + ": separable needs \"fx\" and \"fy\"");
        return PlanarRate::make_separable(scalar_from_json(j.at("fx"), ctx + ".fx"),
                                          scalar_from_json(j.at("fy"), ctx + ".fy"));
    }
    throw ConfigError(ctx + ": unknown planar family \"" + fam + "\"");
}

} // namespace

HistorySegment RunConfig::build_initial_history() const {
    const double h = rates.params.horizon();
    if (initial_history.kind == "constant") {
        return HistorySegment::constant(2, h, {initial_history.w, initial_history.v});
    }
    if (initial_history.kind == "function") {
        const auto& hc = initial_history;
        auto f = [&hc](double th) {
            std::array<double, 2> out{};
            for (int c = 0; c < 2; ++c)
                out[c] = hc.f_c0[c] + hc.f_c1[c] * th + hc.f_c2[c] * std::cos(hc.f_omega[c] * th);
            return out;
        };
        auto fp = [&hc](double th) {
            std::array<double, 2> out{};
            for (int c = 0; c < 2; ++c)
                out[c] = hc.f_c1[c] - hc.f_c2[c] * hc.f_omega[c] * std::sin(hc.f_omega[c] * th);
            return out;
        };
        return HistorySegment::from_function2(h, initial_history.f_knots, f, fp);
    }
    if (initial_history.kind == "file") {
        std::ifstream in(initial_history.path);
        if (!in) throw ConfigError("initial_history.file: cannot open " + initial_history.path);
        HistorySegment seg = HistorySegment::load_csv(in);
        if (seg.dim() != 2) throw ConfigError("initial_history.file: need a dim-2 segment");
        if (std::abs(seg.h() - h) > 1e-9 * std::max(1.0, h))
            throw ConfigError("initial_history.file: segment horizon does not match b/K");
        return seg;
    }
    throw ConfigError("initial_history.kind must be constant | function | file, got \"" +
                      initial_history.kind + "\"");
}

std::string RunConfig::to_json_string() const {
    json j;
    j["params"] = {{"x1", rates.params.x1}, {"x2", rates.params.x2}, {"b", rates.params.b},
                   {"K", rates.params.K},   {"eps", rates.params.eps}, {"mu", rates.params.mu},
                   {"R_minus", rates.params.R_minus}};
    j["rates"] = {{"g", planar_to_json(rates.g)},
                  {"d", planar_to_json(rates.d)},
                  {"beta", scalar_to_json(rates.beta)},
                  {"q", scalar_to_json(rates.q)}};
    json hist;
    hist["kind"] = initial_history.kind;
    if (initial_history.kind == "constant") {
        hist["w"] = initial_history.w;
        hist["v"] = initial_history.v;
    } else if (initial_history.kind == "function") {
        hist["c0"] = initial_history.f_c0;
        hist["c1"] = initial_history.f_c1;
        hist["c2"] = initial_history.f_c2;
        hist["omega"] = initial_history.f_omega;
        hist["knots"] = initial_history.f_knots;
    } else {
        hist["path"] = initial_history.path;
    }
    j["initial_history"] = hist;
    j["integrator"] = {{"dt", integrator.dt},
                       {"inner_m", integrator.inner_m},
                       {"pc_tol", integrator.pc_tol},
                       {"norm_cap", integrator.norm_cap},
                       {"x_tol", integrator.x_tol},
                       {"T", T}};
    j["check"] = {{"y_box", std::array<double, 2>{check.y_lo, check.y_hi}},
                  {"n_grid", check.n_grid},
                  {"lb_pairs", check.lb_pairs},
                  {"s_probes", check.s_probes},
                  {"sampler",
                   {{"value_lo", check.sampler.value_lo},
                    {"value_hi", check.sampler.value_hi},
                    {"deriv_bound", check.sampler.deriv_bound},
                    {"knots", check.sampler.knots}}}};
    j["output"] = {{"dir", out_dir}};
    j["seed"] = seed;
    j["auto_compat"] = auto_compat;
    return j.dump(2);
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw ConfigError(std::string("config: invalid JSON: ") + ex.what());
    }
    RunConfig cfg;
    if (!j.contains("params")) throw ConfigError("config: missing section \"params\"");
    const json& p = j.at("params");
    cfg.rates.params.x1 = need_number(p, "params", "x1");
    cfg.rates.params.x2 = need_number(p, "params", "x2");
    cfg.rates.params.b = need_number(p, "params", "b");
    cfg.rates.params.K = need_number(p, "params", "K");
    cfg.rates.params.eps = need_number(p, "params", "eps");
    cfg.rates.params.mu = need_number(p, "params", "mu");
    cfg.rates.params.R_minus = need_number(p, "params", "R_minus");

    if (!j.contains("rates")) throw ConfigError("config: missing section \"rates\"");
    const json& r = j.at("rates");
    for (const char* name : {"g", "d", "beta", "q"})
        if (!r.contains(name))
            throw ConfigError(std::string("config: rates: missing rate \"") + name + "\"");
    cfg.rates.g = planar_from_json(r.at("g"), "rates.g");
    cfg.rates.d = planar_from_json(r.at("d"), "rates.d");
    cfg.rates.beta = scalar_from_json(r.at("beta"), "rates.beta");
    cfg.rates.q = scalar_from_json(r.at("q"), "rates.q");
    cfg.rates.validate();

    if (j.contains("initial_history")) {
        const json& hjs = j.at("initial_history");
        cfg.initial_history.kind = need_string(hjs, "initial_history", "kind");
        if (cfg.initial_history.kind == "constant") {
            cfg.initial_history.w = need_number(hjs, "initial_history", "w");
            cfg.initial_history.v = need_number(hjs, "initial_history", "v");
        } else if (cfg.initial_history.kind == "function") {
            cfg.initial_history.f_c0 = hjs.at("c0").get<std::array<double, 2>>();
            cfg.initial_history.f_c1 = hjs.at("c1").get<std::array<double, 2>>();
            cfg.initial_history.f_c2 = hjs.at("c2").get<std::array<double, 2>>();
            cfg.initial_history.f_omega = hjs.at("omega").get<std::array<double, 2>>();
            if (hjs.contains("knots")) cfg.initial_history.f_knots = hjs.at("knots").get<int>();
        } else if (cfg.initial_history.kind == "file") {
            cfg.initial_history.path = need_string(hjs, "initial_history", "path");
        } else {
            throw ConfigError("initial_history.kind must be constant | function | file");
        }
    }

    if (j.contains("integrator")) {
        const json& it = j.at("integrator");
        if (it.contains("dt")) cfg.integrator.dt = it.at("dt").get<double>();
        if (it.contains("inner_m")) cfg.integrator.inner_m = it.at("inner_m").get<int>();
        if (it.contains("pc_tol")) cfg.integrator.pc_tol = it.at("pc_tol").get<double>();
        if (it.contains("norm_cap")) cfg.integrator.norm_cap = it.at("norm_cap").get<double>();
        if (it.contains("x_tol")) cfg.integrator.x_tol = it.at("x_tol").get<double>();
        if (it.contains("T")) cfg.T = it.at("T").get<double>();
        if (!(cfg.integrator.dt > 0.0)) throw ConfigError("integrator.dt must be positive");
        if (cfg.integrator.inner_m < 2) throw ConfigError("integrator.inner_m must be >= 2");
        if (!(cfg.T > 0.0)) throw ConfigError("integrator.T must be positive");
    }

    if (j.contains("check")) {
        const json& c = j.at("check");
        if (c.contains("y_box")) {
            const auto box = c.at("y_box").get<std::array<double, 2>>();
            cfg.check.y_lo = box[0];
            cfg.check.y_hi = box[1];
        }
        if (c.contains("n_grid")) cfg.check.n_grid = c.at("n_grid").get<int>();
        if (c.contains("lb_pairs")) cfg.check.lb_pairs = c.at("lb_pairs").get<int>();
        if (c.contains("s_probes")) cfg.check.s_probes = c.at("s_probes").get<int>();
        if (c.contains("sampler")) {
            const json& s = c.at("sampler");
            if (s.contains("value_lo")) cfg.check.sampler.value_lo = s.at("value_lo").get<double>();
            if (s.contains("value_hi")) cfg.check.sampler.value_hi = s.at("value_hi").get<double>();
            if (s.contains("deriv_bound"))
                cfg.check.sampler.deriv_bound = s.at("deriv_bound").get<double>();
            if (s.contains("knots")) cfg.check.sampler.knots = s.at("knots").get<int>();
        }
    }

    if (j.contains("output") && j.at("output").contains("dir"))
        cfg.out_dir = j.at("output").at("dir").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("auto_compat")) cfg.auto_compat = j.at("auto_compat").get<bool>();
    return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

void RunConfig::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << to_json_string() << "\n";
}

} // namespace stemdde
