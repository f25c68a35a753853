#include "fracwave/cli_runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "fracwave/error.hpp"
#include "fracwave/estimate_validator.hpp"
#include "fracwave/mittag_leffler.hpp"
#include "fracwave/regime_analyzer.hpp"

namespace fracwave::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double x, int digits = 17)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    if (std::isnan(x))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

// JSON has no infinities; they travel as the strings "inf" and "-inf".
json jnum(double x)
{
    if (std::isfinite(x))
        return x;
    return num(x);
}

double as_double(const json& v, const std::string& key)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
    }
    throw Error(Errc::ConfigError, "key '" + key + "' must be a number");
}

int as_int(const json& v, const std::string& key)
{
    if (!v.is_number_integer())
        throw Error(Errc::ConfigError, "key '" + key + "' must be an integer");
    return v.get<int>();
}

bool as_bool(const json& v, const std::string& key)
{
    if (!v.is_boolean())
        throw Error(Errc::ConfigError, "key '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key)
{
    if (!v.is_string())
        throw Error(Errc::ConfigError, "key '" + key + "' must be a string");
    return v.get<std::string>();
}

double get_double(const json& obj, const std::string& key, double fallback)
{
    return obj.contains(key) ? as_double(obj.at(key), key) : fallback;
}

double need_double(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key))
        throw Error(Errc::ConfigError, "missing key '" + key + "' in " + where);
    return as_double(obj.at(key), key);
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(Errc::IoError, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

const std::vector<std::string> common_keys = {"seed", "out_dir", "sequential_mode"};

std::vector<std::string> with_common(std::vector<std::string> keys)
{
    keys.insert(keys.end(), common_keys.begin(), common_keys.end());
    return keys;
}

struct Common {
    std::uint64_t seed = 1;
    std::string out_dir;
    bool sequential = false;
};

Common read_common(json& doc, const std::string& command)
{
    Common c;
    if (!doc.contains("seed"))
        doc["seed"] = 1;
    if (!doc.at("seed").is_number_integer() || doc.at("seed").get<long long>() < 0)
        throw Error(Errc::ConfigError, "key 'seed' must be a non-negative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
    if (!doc.contains("out_dir"))
        doc["out_dir"] = "out/" + command;
    c.out_dir = as_string(doc.at("out_dir"), "out_dir");
    if (!doc.contains("sequential_mode"))
        doc["sequential_mode"] = false;
    c.sequential = as_bool(doc.at("sequential_mode"), "sequential_mode");
    return c;
}

void configure_threads(bool sequential)
{
    int threads = omp_get_max_threads();
    if (const char* env = std::getenv("FRACWAVE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0)
            threads = std::min(threads, cap);
    }
    if (sequential)
        threads = 1;
    omp_set_num_threads(threads);
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config)
{
    json m;
    m["artifact"] = "fracwave";
    m["version"] = artifact_version;
    m["command"] = command;
    m["config"] = config;
    write_json(dir / "manifest.json", m);
}

// ---- SVG ----

struct Series {
    std::string label;
    std::vector<double> x, y;
};

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series)
{
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.y[i])))
                continue;
            x0 = std::min(x0, std::log10(s.x[i]));
            x1 = std::max(x1, std::log10(s.x[i]));
            y0 = std::min(y0, std::log10(s.y[i]));
            y1 = std::max(y1, std::log10(s.y[i]));
        }
    if (!(x1 > x0))
        x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0))
        y0 -= 0.5, y1 += 0.5;
    const double W = 640, H = 440, ml = 70, mr = 150, mt = 40, mb = 50;
    auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = static_cast<int>(std::ceil(x0)); k <= std::floor(x1); ++k)
        o << "<text x=\"" << num(px(k), 6) << "\" y=\"" << H - mb + 16
          << "\" text-anchor=\"middle\" font-size=\"11\">1e" << k << "</text>\n";
    for (int k = static_cast<int>(std::ceil(y0)); k <= std::floor(y1); ++k)
        o << "<text x=\"" << ml - 6 << "\" y=\"" << num(py(k) + 4, 6)
          << "\" text-anchor=\"end\" font-size=\"11\">1e" << k << "</text>\n";
    o << "<text x=\"" << (W - mr + ml) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << xlabel << "</text>\n";
    o << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\">" << ylabel << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % 6];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.y[i]))
                o << num(px(std::log10(s.x[i])), 6) << ',' << num(py(std::log10(s.y[i])), 6) << ' ';
        o << "\"/>\n";
        o << "<text x=\"" << W - mr + 8 << "\" y=\"" << mt + 16 + 16 * k << "\" font-size=\"12\" fill=\"" << color
          << "\">" << s.label << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

struct Dot {
    double x, y;
    int category;
};

std::string svg_scatter(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                        const std::vector<Dot>& dots, const std::vector<std::string>& categories)
{
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& d : dots) {
        x0 = std::min(x0, d.x), x1 = std::max(x1, d.x);
        y0 = std::min(y0, d.y), y1 = std::max(y1, d.y);
    }
    if (!(x1 > x0))
        x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0))
        y0 -= 0.5, y1 += 0.5;
    const double W = 640, H = 480, ml = 60, mr = 190, mt = 40, mb = 50;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\" font-size=\"11\">" << num(x0, 4) << "</text>\n";
    o << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"end\" font-size=\"11\">"
      << num(x1, 4) << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb << "\" text-anchor=\"end\" font-size=\"11\">" << num(y0, 4)
      << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\" font-size=\"11\">" << num(y1, 4)
      << "</text>\n";
    o << "<text x=\"" << (W - mr + ml) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << xlabel << "</text>\n";
    o << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\">" << ylabel << "</text>\n";
    for (const auto& d : dots)
        o << "<circle cx=\"" << num(px(d.x), 6) << "\" cy=\"" << num(py(d.y), 6) << "\" r=\"2.5\" fill=\""
          << palette[d.category % 6] << "\" fill-opacity=\"0.7\"/>\n";
    for (std::size_t k = 0; k < categories.size(); ++k)
        o << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 + 16 * k << "\" font-size=\"12\" fill=\""
          << palette[k % 6] << "\">" << categories[k] << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

// ---- JSON views of module results ----

json to_json(const ParamPoint& p)
{
    return {{"gamma1", p.gamma1}, {"gamma2", p.gamma2}, {"p", p.p}, {"q", p.q}, {"N", p.N}};
}

json to_json(const Inequality& q)
{
    return {{"name", q.name}, {"lhs", jnum(q.lhs)}, {"rhs", jnum(q.rhs)}, {"satisfied", q.satisfied}};
}

json to_json(const BootstrapResult& b)
{
    json s1 = json::array(), s2 = json::array();
    for (double x : b.s_prime)
        s1.push_back(jnum(x));
    for (double x : b.s_double_prime)
        s2.push_back(jnum(x));
    return {{"i0", b.i0}, {"increasing", b.increasing}, {"s_prime", s1}, {"s_double_prime", s2}};
}

json to_json(const DerivedExponents& e)
{
    json j = {{"point", to_json(e.point)}, {"delta", e.delta},   {"delta_lo", e.delta_lo}, {"delta_hi", e.delta_hi},
              {"r1", e.r1},                {"r2", e.r2},         {"s1", e.s1},             {"s2", e.s2},
              {"sigma1", e.sigma1},        {"sigma2", e.sigma2}};
    if (e.bootstrap)
        j["bootstrap"] = to_json(*e.bootstrap);
    return j;
}

json to_json(const LedgerCheck& c)
{
    json w = json::array();
    for (const auto& q : c.window)
        w.push_back(to_json(q));
    return {{"identity_sigma", c.identity_sigma},
            {"identity_chain", c.identity_chain},
            {"identity_delta_a", c.identity_delta_a},
            {"identity_delta_b", c.identity_delta_b},
            {"identity_r1", c.identity_r1},
            {"identity_r2", c.identity_r2},
            {"max_identity_residual", c.max_identity_residual()},
            {"window", w},
            {"all_window_hold", c.all_window_hold()}};
}

json to_json(const RegimeReport& r)
{
    json ledger = json::array();
    for (const auto& q : r.ledger)
        ledger.push_back(to_json(q));
    json blow = json::array();
    for (const auto& b : r.blowup)
        blow.push_back({{"lambda", b.lambda}, {"delta1", b.delta1}, {"delta2", b.delta2}});
    json j = {{"point", to_json(r.point)},
              {"normalized", to_json(r.normalized)},
              {"swapped", r.swapped},
              {"classification", regime_name(r.classification)},
              {"global_applicable", r.global_applicable},
              {"global_holds", r.global_holds},
              {"blowup_applicable", r.blowup_applicable},
              {"blowup_block1", r.blowup_block1},
              {"blowup_block2", r.blowup_block2},
              {"inconsistent", r.inconsistent},
              {"near_boundary", r.near_boundary},
              {"ledger", ledger},
              {"blowup_exponents", blow},
              {"flags",
               {{"linf_case_a", r.flag_linf_case_a},
                {"linf_case_b", r.flag_linf_case_b},
                {"linf_case_c", r.flag_linf_case_c}}}};
    j["derived"] = r.derived ? to_json(*r.derived) : json(nullptr);
    return j;
}

ParamPoint read_point(const json& doc, const std::string& where)
{
    ParamPoint p;
    p.gamma1 = need_double(doc, "gamma1", where);
    p.gamma2 = need_double(doc, "gamma2", where);
    p.p = need_double(doc, "p", where);
    p.q = need_double(doc, "q", where);
    if (!doc.contains("N"))
        throw Error(Errc::ConfigError, "missing key 'N' in " + where);
    p.N = as_int(doc.at("N"), "N");
    return p;
}

std::optional<double> read_delta(json& doc)
{
    if (!doc.contains("delta"))
        doc["delta"] = "auto";
    const auto& d = doc.at("delta");
    if (d.is_string() && d.get<std::string>() == "auto")
        return std::nullopt;
    return as_double(d, "delta");
}

// ---- commands ----

int cmd_classify(json doc)
{
    require_known_keys(doc, with_common({"gamma1", "gamma2", "p", "q", "N", "delta", "json"}), "classify");
    const auto c = read_common(doc, "classify");
    const auto point = read_point(doc, "classify");
    const auto delta = read_delta(doc);
    if (!doc.contains("json"))
        doc["json"] = false;
    const bool as_json = as_bool(doc.at("json"), "json");

    const auto report = classify(point, delta);
    const json j = to_json(report);
    const fs::path dir = c.out_dir;
    write_manifest(dir, "classify", doc);
    write_json(dir / "report.json", j);

    std::ostringstream t;
    t << "classification: " << regime_name(report.classification) << "\n";
    t << "point: gamma1=" << num(point.gamma1) << " gamma2=" << num(point.gamma2) << " p=" << num(point.p)
      << " q=" << num(point.q) << " N=" << point.N << (report.swapped ? " (roles swapped)" : "") << "\n";
    t << "global condition: " << (report.global_applicable ? (report.global_holds ? "holds" : "fails") : "n/a") << "\n";
    t << "blow-up condition: "
      << (report.blowup_applicable ? ((report.blowup_block1 || report.blowup_block2) ? "holds" : "fails") : "n/a") << "\n";
    if (report.inconsistent)
        t << "finding: both conditions hold (boundary point)\n";
    for (const auto& q : report.ledger)
        t << "  " << q.name << ": " << num(q.lhs, 10) << " vs " << num(q.rhs, 10) << (q.satisfied ? "  yes" : "  no")
          << "\n";
    if (report.derived)
        t << "delta=" << num(report.derived->delta, 10) << " s1=" << num(report.derived->s1, 10)
          << " s2=" << num(report.derived->s2, 10) << " sigma1=" << num(report.derived->sigma1, 10)
          << " sigma2=" << num(report.derived->sigma2, 10) << "\n";
    write_text(dir / "report.txt", t.str());

    std::cout << (as_json ? j.dump(2) + "\n" : t.str());
    return report.inconsistent ? exit_findings : exit_ok;
}

int cmd_derive(json doc)
{
    require_known_keys(doc, with_common({"gamma1", "gamma2", "p", "q", "N", "delta", "eta"}), "derive");
    const auto c = read_common(doc, "derive");
    const auto point = read_point(doc, "derive");
    const auto delta = read_delta(doc);
    if (!doc.contains("eta"))
        doc["eta"] = nullptr;

    auto exps = derive_exponents(point, delta);
    if (!doc.at("eta").is_null())
        exps.bootstrap = bootstrap_indices(point, exps, as_double(doc.at("eta"), "eta"));
    const auto check = check_ledger(exps);
    const json j = {{"exponents", to_json(exps)}, {"ledger", to_json(check)}};

    const fs::path dir = c.out_dir;
    write_manifest(dir, "derive", doc);
    write_json(dir / "exponents.json", j);
    const bool ok = check.all_window_hold() && check.max_identity_residual() <= boundary_tolerance;
    std::ostringstream t;
    t << "delta window (" << num(exps.delta_lo, 10) << ", " << num(exps.delta_hi, 10) << "), delta "
      << num(exps.delta, 10) << "\n";
    t << "r1=" << num(exps.r1, 10) << " r2=" << num(exps.r2, 10) << " s1=" << num(exps.s1, 10)
      << " s2=" << num(exps.s2, 10) << "\n";
    t << "sigma1=" << num(exps.sigma1, 10) << " sigma2=" << num(exps.sigma2, 10) << "\n";
    t << "max identity residual " << num(check.max_identity_residual(), 3) << ", window "
      << (check.all_window_hold() ? "holds" : "violated") << "\n";
    if (exps.bootstrap)
        t << "bootstrap i0=" << exps.bootstrap->i0 << "\n";
    write_text(dir / "report.txt", t.str());
    std::cout << j.dump(2) << "\n";
    return ok ? exit_ok : exit_findings;
}

std::vector<double> read_axis(const json& spec, const std::string& key)
{
    if (spec.is_number())
        return {spec.get<double>()};
    if (spec.is_array()) {
        std::vector<double> v;
        for (const auto& x : spec)
            v.push_back(as_double(x, key));
        return v;
    }
    if (spec.is_object()) {
        require_known_keys(spec, {"min", "max", "count"}, "grid." + key);
        const double lo = need_double(spec, "min", "grid." + key);
        const double hi = need_double(spec, "max", "grid." + key);
        const int n = spec.contains("count") ? as_int(spec.at("count"), key + ".count") : 2;
        if (n < 1)
            throw Error(Errc::ConfigError, "grid." + key + ".count must be positive");
        std::vector<double> v;
        for (int i = 0; i < n; ++i)
            v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return v;
    }
    throw Error(Errc::ConfigError, "grid." + key + " must be a number, array or {min,max,count}");
}

std::vector<ParamPoint> grid_points(const json& grid, std::uint64_t seed)
{
    std::vector<ParamPoint> pts;
    if (grid.contains("random")) {
        require_known_keys(grid, {"random"}, "grid");
        const auto& r = grid.at("random");
        require_known_keys(r, {"count", "dims"}, "grid.random");
        const int count = r.contains("count") ? as_int(r.at("count"), "count") : 1000;
        std::vector<int> dims = {1, 2, 3};
        if (r.contains("dims")) {
            dims.clear();
            for (const auto& d : r.at("dims"))
                dims.push_back(as_int(d, "dims"));
        }
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> g(1.0, 2.0), e(1.0, 6.0);
        std::uniform_int_distribution<std::size_t> pick(0, dims.size() - 1);
        while (static_cast<int>(pts.size()) < count) {
            ParamPoint p{g(rng), g(rng), e(rng), e(rng), dims[pick(rng)]};
            if (p.gamma1 > 1 && p.gamma2 > 1 && p.p * p.q > 1)
                pts.push_back(p);
        }
        return pts;
    }
    require_known_keys(grid, {"gamma1", "gamma2", "p", "q", "N"}, "grid");
    auto axis = [&](const char* k) {
        if (!grid.contains(k))
            throw Error(Errc::ConfigError, std::string("missing key '") + k + "' in grid");
        return read_axis(grid.at(k), k);
    };
    const auto g1 = axis("gamma1"), g2 = axis("gamma2"), ps = axis("p"), qs = axis("q"), ns = axis("N");
    for (double n : ns)
        for (double a : g1)
            for (double b : g2)
                for (double p : ps)
                    for (double q : qs)
                        pts.push_back({a, b, p, q, static_cast<int>(n)});
    return pts;
}

int cmd_sweep(json doc)
{
    require_known_keys(doc, with_common({"grid", "out"}), "sweep");
    const auto c = read_common(doc, "sweep");
    if (!doc.contains("grid"))
        throw Error(Errc::ConfigError, "missing key 'grid' in sweep");
    if (!doc.contains("out"))
        doc["out"] = (fs::path(c.out_dir) / "phase.csv").string();
    const fs::path out = as_string(doc.at("out"), "out");
    json grid = doc.at("grid");
    if (grid.is_string())
        grid = load_json(grid.get<std::string>());
    const auto pts = grid_points(grid, c.seed);

    const std::vector<std::string> cats = {"GlobalSmallData", "BlowUp", "Indeterminate", "BothConditionsFail"};
    std::ostringstream csv;
    csv << "gamma1,gamma2,p,q,N,classification,inconsistent,delta1_l1,delta2_l1,delta1_l2,delta2_l2,min_delta,"
           "sigma1,sigma2\n";
    std::map<std::string, int> counts;
    std::vector<Dot> dots;
    int findings = 0, invalid = 0;
    std::ostringstream notes;
    for (const auto& p : pts) {
        RegimeReport r;
        try {
            r = classify(p);
        } catch (const Error& e) {
            ++invalid;
            notes << "skipped point: " << e.what() << "\n";
            continue;
        }
        const std::string name = regime_name(r.classification);
        ++counts[name];
        double d[4] = {NAN, NAN, NAN, NAN};
        double md = NAN;
        for (std::size_t k = 0; k < r.blowup.size() && k < 2; ++k) {
            d[2 * k] = r.blowup[k].delta1;
            d[2 * k + 1] = r.blowup[k].delta2;
            const double m = std::min(r.blowup[k].delta1, r.blowup[k].delta2);
            md = std::isnan(md) ? m : std::min(md, m);
        }
        if (r.classification == Regime::BlowUp && !(md < 0)) {
            ++findings;
            notes << "finding: BlowUp point with min delta " << num(md) << " at gamma1=" << num(p.gamma1)
                  << " gamma2=" << num(p.gamma2) << " p=" << num(p.p) << " q=" << num(p.q) << " N=" << p.N << "\n";
        }
        csv << num(p.gamma1) << ',' << num(p.gamma2) << ',' << num(p.p) << ',' << num(p.q) << ',' << p.N << ','
            << name << ',' << (r.inconsistent ? 1 : 0);
        for (double x : d)
            csv << ',' << (std::isnan(x) ? "" : num(x));
        csv << ',' << (std::isnan(md) ? "" : num(md));
        csv << ',' << (r.derived ? num(r.derived->sigma1) : "") << ',' << (r.derived ? num(r.derived->sigma2) : "")
            << '\n';
        dots.push_back({p.p, p.q, static_cast<int>(r.classification)});
    }
    write_text(out, csv.str());
    const fs::path dir = c.out_dir;
    write_manifest(dir, "sweep", doc);
    write_text(dir / "phase.svg", svg_scatter("Regime by exponents", "p", "q", dots, cats));

    std::ostringstream t;
    t << "points: " << pts.size() << " (invalid " << invalid << ")\n";
    for (const auto& cat : cats)
        t << "  " << cat << ": " << counts[cat] << "\n";
    t << "findings: " << findings << "\n" << notes.str();
    write_text(dir / "report.txt", t.str());
    std::cout << t.str();
    return findings ? exit_findings : exit_ok;
}

int cmd_ml_eval(json doc)
{
    require_known_keys(doc, with_common({"alpha", "beta", "z", "digits"}), "ml-eval");
    const auto c = read_common(doc, "ml-eval");
    const double a = need_double(doc, "alpha", "ml-eval");
    const double b = need_double(doc, "beta", "ml-eval");
    const double z = need_double(doc, "z", "ml-eval");
    if (!doc.contains("digits"))
        doc["digits"] = 16;
    const int digits = as_int(doc.at("digits"), "digits");
    if (digits < 1 || digits > 17)
        throw Error(Errc::ConfigError, "key 'digits' must lie in [1, 17]");
    const double v = ml_eval(a, b, z);
    const std::string s = num(v, digits);
    const fs::path dir = c.out_dir;
    write_manifest(dir, "ml-eval", doc);
    write_text(dir / "report.txt", "E(alpha=" + num(a) + ", beta=" + num(b) + ", z=" + num(z) + ") = " + s + "\n");
    std::cout << s << "\n";
    return exit_ok;
}

int cmd_simulate(json doc)
{
    const auto setup = parse_simulation(doc);
    configure_threads(setup.sequential_mode);
    const auto history = run_simulation(setup);
    const fs::path dir = setup.out_dir;
    write_manifest(dir, "simulate", setup.resolved);
    write_history_csv(dir / "history.csv", history);
    const json summary = summary_json(setup, history);
    write_json(dir / "summary.json", summary);
    if (!history.snapshots.empty())
        fs::create_directories(dir / "snapshots");
    for (std::size_t k = 0; k < history.snapshots.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%03zu", k);
        write_grid_binary(dir / "snapshots" / (std::string(name) + "_u.bin"), history.snapshots[k].u);
        write_grid_binary(dir / "snapshots" / (std::string(name) + "_v.bin"), history.snapshots[k].v);
    }

    std::vector<Series> series(4);
    series[0].label = "u, index s_u";
    series[1].label = "v, index s_v";
    series[2].label = "u, sup";
    series[3].label = "v, sup";
    for (const auto& r : history.records) {
        const double x = 1.0 + r.t;
        const double ys[4] = {r.u_s, r.v_s, r.u_inf, r.v_inf};
        for (int k = 0; k < 4; ++k) {
            series[k].x.push_back(x);
            series[k].y.push_back(ys[k]);
        }
    }
    write_text(dir / "norms.svg", svg_loglog("Norm history", "1 + t", "norm", series));

    std::ostringstream t;
    t << "termination: " << termination_name(history.termination.kind) << " at t=" << num(history.termination.t, 10)
      << (history.termination.reason.empty() ? "" : " (" + history.termination.reason + ")") << "\n";
    t << "recorded nodes: " << history.records.size() << "\n";
    for (const auto& w : history.warnings)
        t << "warning: " << w << "\n";
    if (summary.contains("fits"))
        for (const auto& [k, v] : summary.at("fits").items())
            t << "fit " << k << ": slope " << num(v.at("slope").get<double>(), 6) << "\n";
    write_text(dir / "report.txt", t.str());
    std::cout << t.str();
    return history.termination.kind == Termination::Kind::Aborted ? exit_findings : exit_ok;
}

int cmd_fit_decay(json doc)
{
    require_known_keys(doc, with_common({"history", "from", "to", "norm"}), "fit-decay");
    const auto c = read_common(doc, "fit-decay");
    if (!doc.contains("history"))
        throw Error(Errc::ConfigError, "missing key 'history' in fit-decay");
    const auto history = read_history_csv(as_string(doc.at("history"), "history"));
    const double lo = need_double(doc, "from", "fit-decay");
    const double hi = need_double(doc, "to", "fit-decay");
    if (!doc.contains("norm"))
        doc["norm"] = "norm_u_s1";
    const std::string norm = as_string(doc.at("norm"), "norm");
    const auto fit = fit_decay_rate(history, lo, hi, selector_from_name(norm));
    const json j = {{"norm", norm}, {"from", lo}, {"to", hi}, {"slope", fit.slope}, {"r2", fit.r2},
                    {"points", fit.points}};
    const fs::path dir = c.out_dir;
    write_manifest(dir, "fit-decay", doc);
    write_json(dir / "fit.json", j);
    write_text(dir / "report.txt", "slope of log " + norm + " against log(1+t) on [" + num(lo) + ", " + num(hi) +
                                       "]: " + num(fit.slope, 8) + " (r2 " + num(fit.r2, 6) + ", " +
                                       std::to_string(fit.points) + " points)\n");
    std::cout << j.dump(2) << "\n";
    return exit_ok;
}

int cmd_find_threshold(json doc)
{
    require_known_keys(doc, with_common({"config", "lo", "hi", "rel_tol", "max_runs"}), "find-threshold");
    const auto c = read_common(doc, "find-threshold");
    if (!doc.contains("config"))
        throw Error(Errc::ConfigError, "missing key 'config' in find-threshold");
    json templ = doc.at("config");
    if (templ.is_string())
        templ = load_json(templ.get<std::string>());
    templ["sequential_mode"] = c.sequential;
    configure_threads(c.sequential);
    const double lo = need_double(doc, "lo", "find-threshold");
    const double hi = need_double(doc, "hi", "find-threshold");
    if (!doc.contains("rel_tol"))
        doc["rel_tol"] = 0.05;
    if (!doc.contains("max_runs"))
        doc["max_runs"] = 40;
    const double tol = as_double(doc.at("rel_tol"), "rel_tol");
    const int max_runs = as_int(doc.at("max_runs"), "max_runs");

    const fs::path dir = c.out_dir;
    write_manifest(dir, "find-threshold", doc);
    ThresholdSearch s;
    try {
        s = find_threshold(templ, lo, hi, tol, max_runs);
    } catch (const Error& e) {
        write_text(dir / "report.txt", std::string(e.what()) + "\n");
        throw;
    }
    const json j = {{"label", "empirical boundary of the simulated runs; not a proven smallness constant"},
                    {"threshold", s.estimate},
                    {"lo", s.lo},
                    {"hi", s.hi},
                    {"runs", s.runs},
                    {"lo_summary", s.lo_summary},
                    {"hi_summary", s.hi_summary}};
    write_json(dir / "threshold.json", j);
    const std::string t = "empirical threshold " + num(s.estimate, 8) + " in [" + num(s.lo, 8) + ", " +
                          num(s.hi, 8) + "] after " + std::to_string(s.runs) +
                          " runs (empirical, not a proven smallness constant)\n";
    write_text(dir / "report.txt", t);
    std::cout << t;
    return exit_ok;
}

BoxGeometry default_smoothing_geometry(int dim)
{
    if (dim == 1)
        return {1, 4096, 4096.0};
    if (dim == 2)
        return {2, 512, 512.0};
    return {3, 64, 64.0};
}

BoxGeometry default_kernel_geometry(int dim)
{
    if (dim == 1)
        return {1, 4096, 400.0};
    if (dim == 2)
        return {2, 256, 128.0};
    return {3, 64, 64.0};
}

int cmd_validate_kernels(json doc)
{
    require_known_keys(doc, with_common({"alpha", "N", "n", "L", "samples", "probe", "tolerance", "max_per_family",
                                         "out"}),
                       "validate-kernels");
    const auto c = read_common(doc, "validate-kernels");
    const double alpha = need_double(doc, "alpha", "validate-kernels");
    if (!doc.contains("N"))
        throw Error(Errc::ConfigError, "missing key 'N' in validate-kernels");
    const int dim = as_int(doc.at("N"), "N");
    if (dim < 1 || dim > 3)
        throw Error(Errc::ConfigError, "key 'N' must be 1, 2 or 3");
    BoxGeometry sg = default_smoothing_geometry(dim);
    if (!doc.contains("n"))
        doc["n"] = sg.n;
    if (!doc.contains("L"))
        doc["L"] = sg.L;
    sg.n = as_int(doc.at("n"), "n");
    sg.L = as_double(doc.at("L"), "L");
    if (!doc.contains("samples"))
        doc["samples"] = 24;
    if (!doc.contains("probe"))
        doc["probe"] = "gaussian";
    if (!doc.contains("tolerance"))
        doc["tolerance"] = 0.10;
    if (!doc.contains("max_per_family"))
        doc["max_per_family"] = 3;
    if (!doc.contains("out"))
        doc["out"] = (fs::path(c.out_dir) / "report.json").string();
    const std::string probe_name = as_string(doc.at("probe"), "probe");
    ProbeKind probe;
    if (probe_name == "gaussian")
        probe = ProbeKind::Gaussian;
    else if (probe_name == "random_bumps")
        probe = ProbeKind::RandomBumps;
    else
        throw Error(Errc::ConfigError, "key 'probe' must be gaussian or random_bumps");
    const double tol = as_double(doc.at("tolerance"), "tolerance");
    const int per_family = as_int(doc.at("max_per_family"), "max_per_family");
    configure_threads(c.sequential);

    const double inf = p_infinity;
    const std::vector<std::pair<double, double>> candidates = {{2, inf}, {2, 6},   {1.5, 4}, {1.2, 8},
                                                               {1.5, 6}, {1.1, 8}, {2, 2},   {3, inf}};
    json fits = json::array();
    int failures = 0, passes = 0;
    std::ostringstream t;
    for (auto family : {MultiplierFamily::E1, MultiplierFamily::E2, MultiplierFamily::Ealpha}) {
        int used = 0;
        for (auto [p1, p2] : candidates) {
            if (used >= per_family)
                break;
            const double lambda = dim * (1.0 / p1 - (std::isinf(p2) ? 0.0 : 1.0 / p2));
            if (lambda <= 0)
                continue;
            try {
                smoothing_rule(family, alpha, dim, p1, p2);
            } catch (const Error&) {
                continue;
            }
            SmoothingRequest req;
            req.alpha = alpha;
            req.p1 = p1;
            req.p2 = p2;
            req.family = family;
            req.geometry = sg;
            req.probe = probe;
            req.seed = c.seed;
            req.samples = as_int(doc.at("samples"), "samples");
            const auto fit = validate_smoothing(req);
            ++used;
            const bool ranged = fit.decades >= 2.0;
            const bool within = fit.relative_error() <= tol;
            const char* verdict = !ranged ? "insufficient_range" : (within ? "pass" : "fail");
            if (ranged && within)
                ++passes;
            if (ranged && !within)
                ++failures;
            fits.push_back({{"family", family_name(family)},
                            {"p1", jnum(p1)},
                            {"p2", jnum(p2)},
                            {"lambda", fit.lambda},
                            {"rule", fit.rule},
                            {"fitted_slope", fit.fitted_slope},
                            {"predicted_slope", fit.predicted_slope},
                            {"relative_error", fit.relative_error()},
                            {"decades", fit.decades},
                            {"max_ratio_deviation", fit.max_ratio_deviation},
                            {"verdict", verdict}});
            t << family_name(family) << " p1=" << num(p1) << " p2=" << num(p2) << ": slope "
              << num(fit.fitted_slope, 5) << " vs " << num(fit.predicted_slope, 5) << " over "
              << num(fit.decades, 3) << " decades -> " << verdict << "\n";
        }
    }

    const auto kg = default_kernel_geometry(dim);
    const auto kr = validate_pointwise_kernel(alpha, kg, {0.5, 1, 2, 4, 8, 16});
    json kernel = {{"geometry", {{"dim", kg.dim}, {"n", kg.n}, {"L", kg.L}}},
                   {"times", kr.times},
                   {"inner_constant", kr.inner_constant},
                   {"inner_constant_per_time", kr.inner_constant_per_time},
                   {"outer_C", kr.outer_C},
                   {"outer_c", kr.outer_c},
                   {"outer_slope", kr.outer_slope},
                   {"outer_curvature", kr.outer_curvature},
                   {"outer_samples", kr.outer_samples},
                   {"peak", kr.peak},
                   {"peak_slope", kr.peak_slope},
                   {"peak_slope_predicted", kr.peak_slope_predicted},
                   {"l1_mass", kr.l1_mass},
                   {"l1_mass_spread", kr.l1_mass_spread},
                   {"violations", kr.violations}};
    const json invariants = {{"outer_tail_decreasing", kr.outer_decreasing},
                             {"outer_tail_concave", kr.outer_curvature <= 0},
                             {"bounds_hold_at_every_sample", kr.violations == 0}};
    for (const auto& [k, v] : invariants.items())
        if (!v.get<bool>())
            ++failures;
    t << "kernel: inner C " << num(kr.inner_constant, 4) << ", outer C " << num(kr.outer_C, 4) << " c "
      << num(kr.outer_c, 4) << ", curvature " << num(kr.outer_curvature, 3) << ", violations " << kr.violations
      << "\n";
    t << "slope fits passed " << passes << ", failures " << failures << "\n";

    const json report = {{"alpha", alpha},
                         {"N", dim},
                         {"smoothing_geometry", {{"dim", sg.dim}, {"n", sg.n}, {"L", sg.L}}},
                         {"tolerance", tol},
                         {"fits", fits},
                         {"kernel", kernel},
                         {"invariants", invariants},
                         {"failures", failures}};
    const fs::path dir = c.out_dir;
    write_manifest(dir, "validate-kernels", doc);
    write_json(as_string(doc.at("out"), "out"), report);
    write_text(dir / "report.txt", t.str());
    std::cout << t.str();
    return failures ? exit_findings : exit_ok;
}

int dispatch(const std::string& command, const json& doc)
{
    if (!doc.is_object())
        throw Error(Errc::ConfigError, "config for " + command + " must be a JSON object");
    if (command == "classify")
        return cmd_classify(doc);
    if (command == "derive")
        return cmd_derive(doc);
    if (command == "sweep")
        return cmd_sweep(doc);
    if (command == "simulate")
        return cmd_simulate(doc);
    if (command == "validate-kernels")
        return cmd_validate_kernels(doc);
    if (command == "ml-eval")
        return cmd_ml_eval(doc);
    if (command == "fit-decay")
        return cmd_fit_decay(doc);
    if (command == "find-threshold")
        return cmd_find_threshold(doc);
    throw Error(Errc::ConfigError, "unknown command '" + command + "'");
}

DataProfile read_profile(const json& obj, const std::string& where)
{
    require_known_keys(obj, {"profile", "amplitude", "width", "center", "mode"}, where);
    DataProfile d;
    d.kind = obj.contains("profile") ? profile_from_name(as_string(obj.at("profile"), where + ".profile"))
                                     : DataProfile::Kind::Zero;
    d.amplitude = get_double(obj, "amplitude", d.amplitude);
    d.width = get_double(obj, "width", d.width);
    if (obj.contains("center")) {
        const auto& a = obj.at("center");
        if (!a.is_array() || a.size() > 3)
            throw Error(Errc::ConfigError, where + ".center must be an array of at most 3 numbers");
        for (std::size_t i = 0; i < a.size(); ++i)
            d.center[i] = as_double(a[i], where + ".center");
    }
    if (obj.contains("mode")) {
        const auto& a = obj.at("mode");
        if (!a.is_array() || a.size() > 3)
            throw Error(Errc::ConfigError, where + ".mode must be an array of at most 3 integers");
        d.mode = {0, 0, 0};
        for (std::size_t i = 0; i < a.size(); ++i)
            d.mode[i] = as_int(a[i], where + ".mode");
    }
    return d;
}

json profile_json(const DataProfile& d)
{
    return {{"profile", profile_name(d.kind)},
            {"amplitude", d.amplitude},
            {"width", d.width},
            {"center", d.center},
            {"mode", d.mode}};
}

// Norm indices and rates of the point, mapped back to the (u, v) roles.
struct RoleExponents {
    double s_u, s_v, sigma_u, sigma_v;
};

std::optional<RoleExponents> role_exponents(const SystemConfig& cfg)
{
    const ParamPoint pt{cfg.gamma1, cfg.gamma2, cfg.p, cfg.q, cfg.geometry.dim};
    try {
        bool swapped = false;
        if (!normalize_roles(pt, &swapped))
            return std::nullopt;
        const auto e = derive_exponents(pt);
        if (swapped)
            return RoleExponents{e.s2, e.s1, e.sigma2, e.sigma1};
        return RoleExponents{e.s1, e.s2, e.sigma1, e.sigma2};
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

json load_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ConfigError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ConfigError, path.string() + ": " + e.what());
    }
}

void require_known_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw Error(Errc::ConfigError, where + " must be a JSON object");
    for (const auto& [key, value] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw Error(Errc::ConfigError, "unknown key '" + key + "' in " + where);
}

SimulationSetup parse_simulation(const json& input)
{
    json doc = input;
    require_known_keys(doc,
                       with_common({"geometry", "gamma1", "gamma2", "p", "q", "f_form", "g_form", "sign_f", "sign_g",
                                    "data", "data_scale", "mesh", "blowup_cap", "norm_index_u", "norm_index_v",
                                    "snapshots", "picard_sweeps", "picard_tol", "fit_window"}),
                       "simulate");
    const auto c = read_common(doc, "simulate");
    SimulationSetup s;
    s.seed = c.seed;
    s.out_dir = c.out_dir;
    s.sequential_mode = c.sequential;
    auto& cfg = s.system;

    if (!doc.contains("geometry"))
        throw Error(Errc::ConfigError, "missing key 'geometry' in simulate");
    const auto& g = doc.at("geometry");
    require_known_keys(g, {"dim", "n", "L"}, "simulate.geometry");
    cfg.geometry.dim = as_int(g.at("dim"), "geometry.dim");
    cfg.geometry.n = as_int(g.at("n"), "geometry.n");
    cfg.geometry.L = need_double(g, "L", "simulate.geometry");
    cfg.geometry.validate();

    cfg.gamma1 = need_double(doc, "gamma1", "simulate");
    cfg.gamma2 = need_double(doc, "gamma2", "simulate");
    cfg.p = need_double(doc, "p", "simulate");
    cfg.q = need_double(doc, "q", "simulate");
    if (doc.contains("f_form"))
        cfg.f_form = form_from_name(as_string(doc.at("f_form"), "f_form"));
    if (doc.contains("g_form"))
        cfg.g_form = form_from_name(as_string(doc.at("g_form"), "g_form"));
    if (doc.contains("sign_f"))
        cfg.sign_f = as_int(doc.at("sign_f"), "sign_f");
    if (doc.contains("sign_g"))
        cfg.sign_g = as_int(doc.at("sign_g"), "sign_g");
    doc["f_form"] = form_name(cfg.f_form);
    doc["g_form"] = form_name(cfg.g_form);
    doc["sign_f"] = cfg.sign_f;
    doc["sign_g"] = cfg.sign_g;

    json data = doc.contains("data") ? doc.at("data") : json::object();
    require_known_keys(data, {"u0", "u1", "v0", "v1"}, "simulate.data");
    json resolved_data = json::object();
    GridFunction* fields[4] = {&cfg.u0, &cfg.u1, &cfg.v0, &cfg.v1};
    const char* names[4] = {"u0", "u1", "v0", "v1"};
    for (int k = 0; k < 4; ++k) {
        const auto d = data.contains(names[k]) ? read_profile(data.at(names[k]), std::string("data.") + names[k])
                                               : DataProfile{};
        *fields[k] = d.realize(cfg.geometry);
        resolved_data[names[k]] = profile_json(d);
    }
    doc["data"] = resolved_data;
    cfg.data_scale = get_double(doc, "data_scale", 1.0);
    doc["data_scale"] = cfg.data_scale;
    cfg.blowup_cap = get_double(doc, "blowup_cap", cfg.blowup_cap);
    doc["blowup_cap"] = cfg.blowup_cap;

    const auto exps = role_exponents(cfg);
    auto index = [&](const char* key, double fallback, double derived_value) {
        if (!doc.contains(key))
            doc[key] = fallback;
        const auto& v = doc.at(key);
        if (v.is_string() && v.get<std::string>() == "auto") {
            if (!exps)
                throw Error(Errc::ConfigError, std::string("key '") + key +
                                                   "' is auto but no exponent window exists at this point");
            return derived_value;
        }
        return as_double(v, key);
    };
    cfg.norm_index_u = index("norm_index_u", 2.0, exps ? exps->s_u : 0.0);
    cfg.norm_index_v = index("norm_index_v", 2.0, exps ? exps->s_v : 0.0);

    if (doc.contains("snapshots")) {
        if (!doc.at("snapshots").is_array())
            throw Error(Errc::ConfigError, "key 'snapshots' must be an array of times");
        for (const auto& t : doc.at("snapshots"))
            cfg.snapshot_times.push_back(as_double(t, "snapshots"));
    }
    doc["snapshots"] = cfg.snapshot_times;
    cfg.policy = s.sequential_mode ? ExecPolicy::Sequential : ExecPolicy::Parallel;

    if (!doc.contains("mesh"))
        throw Error(Errc::ConfigError, "missing key 'mesh' in simulate");
    json mesh = doc.at("mesh");
    require_known_keys(mesh, {"horizon", "steps", "grading"}, "simulate.mesh");
    s.mesh.horizon = need_double(mesh, "horizon", "simulate.mesh");
    if (!mesh.contains("steps"))
        throw Error(Errc::ConfigError, "missing key 'steps' in simulate.mesh");
    s.mesh.steps = as_int(mesh.at("steps"), "mesh.steps");
    if (!mesh.contains("grading"))
        mesh["grading"] = 1.0;
    if (mesh.at("grading").is_string() && mesh.at("grading").get<std::string>() == "auto")
        s.mesh.chi = TimeMesh::graded(s.mesh.horizon, s.mesh.steps, cfg.gamma1, cfg.gamma2).chi;
    else
        s.mesh.chi = as_double(mesh.at("grading"), "mesh.grading");
    doc["mesh"] = mesh;
    s.mesh.validate();

    if (!doc.contains("picard_sweeps"))
        doc["picard_sweeps"] = 0;
    s.picard_sweeps = as_int(doc.at("picard_sweeps"), "picard_sweeps");
    if (s.picard_sweeps < 0)
        throw Error(Errc::ConfigError, "key 'picard_sweeps' must be non-negative");
    cfg.picard_tol = get_double(doc, "picard_tol", cfg.picard_tol);
    doc["picard_tol"] = cfg.picard_tol;

    if (doc.contains("fit_window") && !doc.at("fit_window").is_null()) {
        const auto& w = doc.at("fit_window");
        if (!w.is_array() || w.size() != 2)
            throw Error(Errc::ConfigError, "key 'fit_window' must be [t_lo, t_hi]");
        s.fit_window = std::make_pair(as_double(w[0], "fit_window"), as_double(w[1], "fit_window"));
    } else {
        doc["fit_window"] = nullptr;
    }
    cfg.validate();
    s.resolved = doc;
    return s;
}

SolutionHistory run_simulation(const SimulationSetup& setup)
{
    if (setup.picard_sweeps > 0)
        return picard_refine(setup.system, setup.mesh, setup.picard_sweeps);
    return step_mild_system(setup.system, setup.mesh);
}

void write_history_csv(const fs::path& path, const SolutionHistory& history)
{
    std::ostringstream o;
    o << "t,norm_u_s1,norm_v_s2,norm_u_inf,norm_v_inf,norm_u_1,norm_v_1\n";
    for (const auto& r : history.records)
        o << num(r.t) << ',' << num(r.u_s) << ',' << num(r.v_s) << ',' << num(r.u_inf) << ',' << num(r.v_inf) << ','
          << num(r.u_1) << ',' << num(r.v_1) << '\n';
    write_text(path, o.str());
}

SolutionHistory read_history_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "t,norm_u_s1,norm_v_s2,norm_u_inf,norm_v_inf,norm_u_1,norm_v_1")
        throw Error(Errc::IoError, path.string() + ": unexpected header");
    SolutionHistory h;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string cell;
        double v[7];
        int k = 0;
        while (k < 7 && std::getline(ls, cell, ',')) {
            char* end = nullptr;
            v[k] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw Error(Errc::IoError, path.string() + ":" + std::to_string(lineno) + ": bad number");
            ++k;
        }
        if (k != 7)
            throw Error(Errc::IoError, path.string() + ":" + std::to_string(lineno) + ": expected 7 columns");
        h.records.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
    }
    h.termination = {Termination::Kind::Completed, h.records.empty() ? 0.0 : h.records.back().t, {}};
    return h;
}

json summary_json(const SimulationSetup& setup, const SolutionHistory& history)
{
    json j;
    j["termination"] = {{"kind", termination_name(history.termination.kind)},
                        {"t", jnum(history.termination.t)},
                        {"reason", history.termination.reason}};
    j["recorded_nodes"] = history.records.size();
    j["final_t"] = history.records.empty() ? 0.0 : history.records.back().t;
    j["warnings"] = history.warnings;
    j["norm_index_u"] = setup.system.norm_index_u;
    j["norm_index_v"] = setup.system.norm_index_v;
    const ParamPoint pt{setup.system.gamma1, setup.system.gamma2, setup.system.p, setup.system.q,
                        setup.system.geometry.dim};
    try {
        j["classification"] = regime_name(classify(pt).classification);
    } catch (const Error& e) {
        j["classification"] = nullptr;
    }
    if (const auto e = role_exponents(setup.system))
        j["predicted_rates"] = {{"sigma_u", e->sigma_u}, {"sigma_v", e->sigma_v}};
    double peak = 0.0;
    for (const auto& r : history.records)
        peak = std::max(peak, r.u_inf + r.v_inf);
    j["max_sup_sum"] = jnum(peak);
    if (setup.fit_window && history.termination.kind == Termination::Kind::Completed) {
        json fits = json::object();
        const std::pair<const char*, NormSelector> sel[] = {{"norm_u_s1", NormSelector::U_s},
                                                            {"norm_v_s2", NormSelector::V_s},
                                                            {"norm_u_inf", NormSelector::U_inf},
                                                            {"norm_v_inf", NormSelector::V_inf}};
        for (const auto& [name, which] : sel) {
            try {
                const auto f = fit_decay_rate(history, setup.fit_window->first, setup.fit_window->second, which);
                fits[name] = {{"slope", f.slope}, {"r2", f.r2}, {"points", f.points}};
            } catch (const Error& e) {
                fits[name] = {{"error", e.what()}};
            }
        }
        j["fits"] = fits;
    }
    return j;
}

ThresholdSearch find_threshold(const json& simulate_doc, double lo, double hi, double rel_tol, int max_runs)
{
    if (!(lo > 0) || !(hi > lo))
        throw Error(Errc::BracketInvalid, "bracket endpoints must satisfy 0 < lo < hi, got [" + num(lo) + ", " +
                                              num(hi) + "]");
    if (!(rel_tol > 0))
        throw Error(Errc::InvalidParams, "rel_tol must be positive");
    ThresholdSearch s;
    auto attempt = [&](double scale, json* summary) {
        json doc = simulate_doc;
        doc["data_scale"] = scale;
        const auto setup = parse_simulation(doc);
        const auto h = run_simulation(setup);
        ++s.runs;
        *summary = summary_json(setup, h);
        (*summary)["data_scale"] = scale;
        return h.termination.kind == Termination::Kind::Completed;
    };
    json lo_sum, hi_sum;
    const bool lo_ok = attempt(lo, &lo_sum);
    const bool hi_ok = attempt(hi, &hi_sum);
    if (lo_ok == hi_ok) {
        std::string msg = "both endpoints " + std::string(lo_ok ? "complete" : "fail to complete");
        if (!lo_ok && lo_sum.value("classification", json()) == json("BlowUp"))
            msg += "; the point lies in the blow-up regime, where no data size gives a global solution";
        throw Error(Errc::BracketInvalid, msg);
    }
    if (!lo_ok)
        throw Error(Errc::BracketInvalid, "misordered bracket: lo fails to complete while hi completes");
    s.lo = lo;
    s.hi = hi;
    s.lo_summary = lo_sum;
    s.hi_summary = hi_sum;
    while (s.hi / s.lo - 1.0 > rel_tol && s.runs < max_runs) {
        const double mid = std::sqrt(s.lo * s.hi);
        json sum;
        if (attempt(mid, &sum)) {
            s.lo = mid;
            s.lo_summary = sum;
        } else {
            s.hi = mid;
            s.hi_summary = sum;
        }
    }
    s.estimate = std::sqrt(s.lo * s.hi);
    return s;
}

int run(int argc, char** argv)
{
    CLI::App app{"Fractional wave system toolkit"};
    app.require_subcommand(1);
    std::string out_dir;
    std::uint64_t seed = 1;
    bool sequential = false;
    std::string config_path;
    std::map<std::string, double> nums;
    std::map<std::string, std::string> strs;
    std::map<std::string, int> ints;
    bool json_flag = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out-dir", out_dir, "Directory for manifest, report and outputs");
        sub->add_option("--seed", seed, "Random seed");
        sub->add_flag("--sequential", sequential, "Single-threaded, reproducible execution");
    };
    auto point = [&](CLI::App* sub) {
        for (const char* k : {"gamma1", "gamma2", "p", "q"})
            sub->add_option(std::string("--") + k, nums[k])->required();
        sub->add_option("--N", ints["N"])->required();
        sub->add_option("--delta", strs["delta"], "auto or a value inside the window")->default_val("auto");
    };

    auto* classify_cmd = app.add_subcommand("classify", "Regime of an exponent point");
    point(classify_cmd);
    classify_cmd->add_flag("--json", json_flag, "Print the report as JSON");
    auto* derive_cmd = app.add_subcommand("derive", "Derived exponents and identity ledger");
    point(derive_cmd);
    derive_cmd->add_option("--eta", strs["eta"], "Bootstrap step");
    auto* sweep_cmd = app.add_subcommand("sweep", "Phase table over a parameter grid");
    sweep_cmd->add_option("--grid", strs["grid"], "Grid spec JSON")->required();
    sweep_cmd->add_option("--out", strs["out"], "CSV output path");
    auto* sim_cmd = app.add_subcommand("simulate", "Integrate the mild system");
    sim_cmd->add_option("--config", config_path, "Simulation config JSON")->required();
    auto* val_cmd = app.add_subcommand("validate-kernels", "Fit smoothing rates and kernel bounds");
    val_cmd->add_option("--alpha", nums["alpha"])->required();
    val_cmd->add_option("--N", ints["N"])->required();
    val_cmd->add_option("--out", strs["out"], "Report JSON path");
    val_cmd->add_option("--probe", strs["probe"], "gaussian or random_bumps");
    auto* ml_cmd = app.add_subcommand("ml-eval", "Evaluate the two-parameter Mittag-Leffler function");
    ml_cmd->add_option("--alpha", nums["alpha"])->required();
    ml_cmd->add_option("--beta", nums["beta"])->required();
    ml_cmd->add_option("--z", nums["z"])->required();
    ml_cmd->add_option("--digits", ints["digits"], "Significant digits printed (default 16)");
    auto* fit_cmd = app.add_subcommand("fit-decay", "Power-law fit of a recorded norm");
    fit_cmd->add_option("--history", strs["history"], "history.csv of a simulate run")->required();
    fit_cmd->add_option("--from", nums["from"])->required();
    fit_cmd->add_option("--to", nums["to"])->required();
    fit_cmd->add_option("--norm", strs["norm"], "History column (default norm_u_s1)");
    auto* thr_cmd = app.add_subcommand("find-threshold", "Empirical data-size boundary by bisection");
    thr_cmd->add_option("--config", config_path, "Simulation config JSON")->required();
    thr_cmd->add_option("--lo", nums["lo"])->required();
    thr_cmd->add_option("--hi", nums["hi"])->required();
    thr_cmd->add_option("--tol", nums["rel_tol"], "Stop when hi/lo - 1 <= tol (default 0.05)");
    auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay_cmd->add_option("--manifest", config_path, "manifest.json of an earlier run")->required();
    replay_cmd->add_option("--out-dir", out_dir, "Override the recorded output directory");
    for (auto* sub : {classify_cmd, derive_cmd, sweep_cmd, sim_cmd, val_cmd, ml_cmd, fit_cmd, thr_cmd})
        common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_error;
    }

    try {
        auto* sub = app.get_subcommands().front();
        const std::string command = sub->get_name();
        json doc = json::object();
        auto given = [&](const char* flag) { return sub->count(flag) > 0; };
        auto put_common = [&] {
            if (given("--out-dir"))
                doc["out_dir"] = out_dir;
            if (given("--seed"))
                doc["seed"] = seed;
            if (given("--sequential"))
                doc["sequential_mode"] = true;
        };
        if (command == "replay") {
            const json m = load_json(config_path);
            require_known_keys(m, {"artifact", "version", "command", "config"}, "manifest");
            doc = m.at("config");
            if (given("--out-dir"))
                doc["out_dir"] = out_dir;
            return dispatch(as_string(m.at("command"), "command"), doc);
        }
        if (command == "simulate") {
            doc = load_json(config_path);
            put_common();
            return dispatch(command, doc);
        }
        if (command == "classify" || command == "derive") {
            for (const char* k : {"gamma1", "gamma2", "p", "q"})
                doc[k] = nums[k];
            doc["N"] = ints["N"];
            const auto& d = strs["delta"];
            doc["delta"] = d == "auto" ? json("auto") : json(std::stod(d));
            if (command == "classify")
                doc["json"] = json_flag;
            if (command == "derive" && given("--eta"))
                doc["eta"] = std::stod(strs["eta"]);
        } else if (command == "sweep") {
            doc["grid"] = load_json(strs["grid"]);
            if (given("--out"))
                doc["out"] = strs["out"];
        } else if (command == "validate-kernels") {
            doc["alpha"] = nums["alpha"];
            doc["N"] = ints["N"];
            if (given("--out"))
                doc["out"] = strs["out"];
            if (given("--probe"))
                doc["probe"] = strs["probe"];
        } else if (command == "ml-eval") {
            doc["alpha"] = nums["alpha"];
            doc["beta"] = nums["beta"];
            doc["z"] = nums["z"];
            if (given("--digits"))
                doc["digits"] = ints["digits"];
        } else if (command == "fit-decay") {
            doc["history"] = strs["history"];
            doc["from"] = nums["from"];
            doc["to"] = nums["to"];
            if (given("--norm"))
                doc["norm"] = strs["norm"];
        } else if (command == "find-threshold") {
            doc["config"] = load_json(config_path);
            doc["lo"] = nums["lo"];
            doc["hi"] = nums["hi"];
            if (given("--tol"))
                doc["rel_tol"] = nums["rel_tol"];
        }
        put_common();
        return dispatch(command, doc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
}

}  // namespace fracwave::cli
