#include "slh/cli.hpp"

#include <algorithm>
#include <charconv>
#include <type_traits>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "slh/synth.hpp"

namespace slh {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string opt_num(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::vector<std::string> split(const std::string& s, char d) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, d))
        out.push_back(item);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    double v;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::ConfigInvalid, what + ": cannot parse '" + s + "' as a number");
    return v;
}

std::size_t to_size(const std::string& s, const std::string& what) {
    std::size_t v;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::ConfigInvalid, what + ": cannot parse '" + s + "' as a nonnegative integer");
    return v;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& f : split(s, ','))
        out.push_back(to_double(f, what));
    return out;
}

std::pair<std::string, std::string> parse_pair(const std::string& s, const std::string& what) {
    const auto parts = split(s, ':');
    if (parts.size() != 2)
        throw Error(ErrorCode::ConfigInvalid, what + ": expected LO:HI, got '" + s + "'");
    return {parts[0], parts[1]};
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct LoadedInput {
    PriceSeries series;
    std::string hash;
};

LoadedInput load_input(const RunConfig& cfg) {
    const std::string bytes = read_file(cfg.input);
    auto series = parse_price_text(bytes, ColumnSpec::parse(cfg.column), fs::path(cfg.input).filename().string());
    if (cfg.log_prices)
        series = log_prices(series);
    return {std::move(series), hash_hex(content_hash(bytes))};
}

std::string summary_header() { return "label,beta,beta_stderr,h0,C,C_spread,flat,max_abs_f,config_hash\n"; }

std::string summary_row(const std::string& label, const HierarchyEstimate* e, const std::string& config_hash) {
    std::string row = csv_field(label) + ",";
    if (e) {
        row += fmt(e->beta.beta) + "," + fmt(e->beta.stderr_beta) + "," + opt_num(e->h0) + "," + opt_num(e->C) +
               "," + opt_num(e->C_spread) + ",";
        if (e->flatness)
            row += std::string(e->flatness->flat ? "true" : "false") + "," + fmt(e->flatness->max_abs_f);
        else
            row += ",";
    } else {
        row += ",,,,,,";
    }
    return row + "," + config_hash + "\n";
}

std::string xi_csv(const HierarchyEstimate& e) {
    std::string out = "p,xi,stderr,r2,xi_model\n";
    for (std::size_t i = 0; i < e.xi_fit.p.size(); ++i) {
        const double p = e.xi_fit.p[i];
        std::string model;
        if (e.C && e.h0)
            model = fmt(theoretical_xi(e.beta.beta, *e.C, *e.h0, p));
        out += fmt(p) + "," + fmt(e.xi_fit.xi[i]) + "," + fmt(e.xi_fit.se[i]) + "," + fmt(e.xi_fit.r2[i]) + "," +
               model + "\n";
    }
    return out;
}

std::string f_csv(const HierarchyEstimate& e) {
    std::string out = "log2_tau,tau,p,q,F\n";
    if (!e.flatness)
        return out;
    for (const auto& c : e.flatness->curves)
        for (std::size_t k = 0; k < e.flatness->taus.size(); ++k) {
            const auto tau = e.flatness->taus[k];
            out += fmt(std::log2(static_cast<double>(tau))) + "," + std::to_string(tau) + "," + fmt(c.p) + "," +
                   fmt(c.q) + "," + fmt(c.f[k]) + "\n";
        }
    return out;
}

json envelope(const RunConfig& cfg, const std::string& input_hash, std::size_t length) {
    return {{"schema_version", kReportSchemaVersion},
            {"config", cfg.to_json()},
            {"config_hash", hash_hex(content_hash(cfg.canonical()))},
            {"input", {{"path", cfg.input}, {"content_hash", input_hash}, {"length", length}}},
            {"returns", {{"definition", cfg.log_prices ? "log price difference" : "price difference"},
                         {"overlap_mode", "overlapping, stride 1"}}}};
}

void report_error(const Error& e) { std::cerr << "error: " << e.what() << "\n"; }

} // namespace

AnalysisConfig RunConfig::analysis(unsigned workers) const {
    AnalysisConfig a;
    a.grid = MomentGrid{MomentGrid::p_range(p_grid.start, p_grid.stop, p_grid.step), tau_grid};
    a.fit_range = fit_range;
    a.n = n;
    a.q = q;
    a.delta_p = delta_p;
    a.p_start = p_start;
    a.p_end = p_end;
    a.flat_p_set = flat_p_set;
    a.flat_q_set = flat_q_set;
    a.tau0 = tau0;
    a.threshold = threshold;
    a.c_p_lo = c_p_lo;
    a.c_p_hi = c_p_hi;
    a.workers = workers;
    return a;
}

void RunConfig::validate(bool need_windows) const {
    std::vector<std::string> errs;
    if (input.empty())
        errs.push_back("input path is required");
    if (column.empty())
        errs.push_back("column must be a name or an index");
    if (!(p_grid.step > 0.0) || !(p_grid.start > 0.0) || p_grid.stop < p_grid.start)
        errs.push_back("p grid needs 0 < start <= stop and step > 0");
    else
        try {
            analysis().validate();
        } catch (const Error& e) {
            errs.push_back(e.detail());
        }
    if (need_windows && window_count == 0 && window_ranges.empty())
        errs.push_back("windows need a count or explicit ranges");
    for (const auto& w : window_ranges)
        if (w.end <= w.begin)
            errs.push_back("window " + std::to_string(w.begin) + ":" + std::to_string(w.end) + " is empty");
    if (output_dir.empty())
        errs.push_back("output directory is required");
    if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs)
            msg += (msg.empty() ? "" : "; ") + e;
        throw Error(ErrorCode::ConfigInvalid, msg);
    }
}

json RunConfig::to_json() const {
    json ranges = json::array();
    for (const auto& w : window_ranges)
        ranges.push_back({w.begin, w.end});
    return {{"input", input},
            {"column", column},
            {"log_prices", log_prices},
            {"p_grid", {{"start", p_grid.start}, {"stop", p_grid.stop}, {"step", p_grid.step}}},
            {"tau_grid", tau_grid},
            {"fit_tau_range", {fit_range.lo, fit_range.hi}},
            {"n", n},
            {"q", q},
            {"delta_p", delta_p},
            {"p_start", p_start},
            {"p_end", p_end},
            {"flatness_p_set", flat_p_set},
            {"flatness_q_set", flat_q_set},
            {"tau0", tau0},
            {"flatness_threshold", threshold},
            {"c_p_range", {c_p_lo, c_p_hi}},
            {"windows", {{"count", window_count}, {"ranges", ranges}}},
            {"output_dir", output_dir},
            {"seed", seed ? json(*seed) : json(nullptr)}};
}

namespace {

bool has_negative_integer(const json& v) {
    if (v.is_number_integer() && !v.is_number_unsigned())
        return v.get<std::int64_t>() < 0;
    if (v.is_array())
        return std::any_of(v.begin(), v.end(), [](const json& e) { return has_negative_integer(e); });
    return false;
}

template <class T> bool holds_unsigned(const T&) { return std::is_unsigned_v<T>; }
template <class T> bool holds_unsigned(const std::vector<T>&) { return std::is_unsigned_v<T>; }
template <class A, class B> bool holds_unsigned(const std::pair<A, B>&) {
    return std::is_unsigned_v<A> || std::is_unsigned_v<B>;
}

} // namespace

RunConfig RunConfig::from_json(const json& doc) {
    if (!doc.is_object())
        throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    static const std::vector<std::string> known{
        "input",         "column",         "log_prices",         "p_grid",    "tau_grid",   "fit_tau_range",
        "n",             "q",              "delta_p",            "p_start",   "p_end",      "flatness_p_set",
        "flatness_q_set", "tau0",          "flatness_threshold", "c_p_range", "windows",    "output_dir",
        "seed"};
    std::vector<std::string> errs;
    for (const auto& [k, v] : doc.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            errs.push_back("unknown key '" + k + "'");

    RunConfig c;
    auto take = [&](const char* key, auto& field) {
        if (!doc.contains(key))
            return;
        if (has_negative_integer(doc.at(key)) && holds_unsigned(field)) {
            errs.push_back(std::string("key '") + key + "' must not be negative");
            return;
        }
        try {
            doc.at(key).get_to(field);
        } catch (const json::exception&) {
            errs.push_back(std::string("key '") + key + "' has the wrong type");
        }
    };
    take("input", c.input);
    take("column", c.column);
    take("log_prices", c.log_prices);
    if (doc.contains("p_grid")) {
        try {
            const auto& g = doc.at("p_grid");
            c.p_grid = {g.at("start").get<double>(), g.at("stop").get<double>(), g.at("step").get<double>()};
        } catch (const json::exception&) {
            errs.push_back("key 'p_grid' needs numeric start, stop, step");
        }
    }
    take("tau_grid", c.tau_grid);
    std::pair<std::size_t, std::size_t> fr{c.fit_range.lo, c.fit_range.hi};
    take("fit_tau_range", fr);
    c.fit_range = {fr.first, fr.second};
    take("n", c.n);
    take("q", c.q);
    take("delta_p", c.delta_p);
    take("p_start", c.p_start);
    take("p_end", c.p_end);
    take("flatness_p_set", c.flat_p_set);
    take("flatness_q_set", c.flat_q_set);
    take("tau0", c.tau0);
    take("flatness_threshold", c.threshold);
    std::pair<double, double> cr{c.c_p_lo, c.c_p_hi};
    take("c_p_range", cr);
    c.c_p_lo = cr.first;
    c.c_p_hi = cr.second;
    if (doc.contains("windows")) {
        try {
            const auto& w = doc.at("windows");
            if (has_negative_integer(w))
                throw json::other_error::create(501, "negative", nullptr);
            c.window_count = w.value("count", std::size_t{0});
            for (const auto& r : w.value("ranges", json::array()))
                c.window_ranges.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
        } catch (const json::exception&) {
            errs.push_back("key 'windows' needs {count, ranges: [[begin, end], ...]}");
        }
    }
    take("output_dir", c.output_dir);
    if (doc.contains("seed") && !doc.at("seed").is_null()) {
        try {
            c.seed = doc.at("seed").get<std::uint64_t>();
        } catch (const json::exception&) {
            errs.push_back("key 'seed' must be a nonnegative integer or null");
        }
    }
    if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs)
            msg += (msg.empty() ? "" : "; ") + e;
        throw Error(ErrorCode::ConfigInvalid, msg);
    }
    return c;
}

std::string RunConfig::canonical() const { return to_json().dump(2) + "\n"; }

RunConfig RunConfig::load(const fs::path& path) {
    const std::string text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
    }
    return from_json(doc);
}

void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

int exit_code_for(const Error& e) { return static_cast<int>(e.category()); }

int cmd_analyze(const RunConfig& config, unsigned workers) {
    try {
        config.validate();
        const auto in = load_input(config);
        const auto est = analyze(in.series, config.analysis(workers));
        const std::string chash = hash_hex(content_hash(config.canonical()));

        json report = envelope(config, in.hash, in.series.size());
        report["result"] = to_json(est);

        const fs::path dir(config.output_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
        atomic_write(dir / "report.json", report.dump(2) + "\n");
        atomic_write(dir / "summary.csv", summary_header() + summary_row(est.label, &est, chash));
        atomic_write(dir / "xi_vs_p.csv", xi_csv(est));
        atomic_write(dir / "scatter.csv", scatter_csv(est.sequence));
        atomic_write(dir / "f_vs_log2tau.csv", f_csv(est));
        for (const auto& f : est.failures)
            std::cerr << "warning: [" << f.stage << "] " << code_name(f.code) << ": " << f.message << "\n";
        return 0;
    } catch (const Error& e) {
        report_error(e);
        return exit_code_for(e);
    }
}

int cmd_windows(const RunConfig& config, unsigned workers) {
    try {
        config.validate(true);
        const auto in = load_input(config);
        const auto windows = config.window_count > 0 ? equal_windows(in.series.size(), config.window_count)
                                                     : config.window_ranges;
        const auto acfg = config.analysis(workers);
        auto results = windowed_analyze(in.series, windows, acfg);
        const auto total = windowed_analyze(in.series, {{0, in.series.size()}}, acfg).front();
        const std::string chash = hash_hex(content_hash(config.canonical()));

        std::string csv = "window,begin,end," + summary_header().substr(0, summary_header().size() - 1) +
                          ",failures\n";
        json items = json::array();
        bool any_ok = false;
        std::optional<int> first_code;
        auto emit = [&](const std::string& name, const WindowResult& r) {
            const HierarchyEstimate* e = r.estimate ? &*r.estimate : nullptr;
            std::vector<StageFailure> fails = r.failures;
            if (e)
                fails.insert(fails.end(), e->failures.begin(), e->failures.end());
            std::string ftxt;
            for (const auto& f : fails)
                ftxt += (ftxt.empty() ? "" : "; ") + f.stage + ":" + code_name(f.code);
            const std::string label = e ? e->label : name;
            auto row = summary_row(label, e, chash);
            row.pop_back();
            csv += name + "," + std::to_string(r.window.begin) + "," + std::to_string(r.window.end) + "," + row +
                   "," + csv_field(ftxt) + "\n";
            json fj = json::array();
            for (const auto& f : fails)
                fj.push_back(to_json(f));
            items.push_back({{"window", name},
                             {"begin", r.window.begin},
                             {"end", r.window.end},
                             {"result", e ? to_json(*e) : json(nullptr)},
                             {"failures", fj}});
        };
        for (std::size_t k = 0; k < results.size(); ++k) {
            emit(std::to_string(k), results[k]);
            if (results[k].estimate && results[k].estimate->failures.empty())
                any_ok = true;
            else if (!first_code)
                first_code = static_cast<int>(category_of(results[k].estimate ? results[k].estimate->failures[0].code
                                                                             : results[k].failures[0].code));
        }
        emit("total", total);

        json report = envelope(config, in.hash, in.series.size());
        report["windows"] = items;
        const fs::path dir(config.output_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
        atomic_write(dir / "windows.json", report.dump(2) + "\n");
        atomic_write(dir / "windows_summary.csv", csv);
        if (!any_ok) {
            std::cerr << "error: no window completed every stage\n";
            return first_code.value_or(3);
        }
        return 0;
    } catch (const Error& e) {
        report_error(e);
        return exit_code_for(e);
    }
}

namespace {

struct AnalysisFlags {
    std::string config_path, input, column, p_grid, taus, fit_range, flat_p, flat_q, c_range, out, ranges,
        write_config, scatter;
    double n = 0, q = 0, delta_p = 0, p_start = 0, p_end = 0, threshold = 0;
    std::size_t tau0 = 0, tau_max = 0, windows = 0;
    bool log_prices = false;
    unsigned workers = 1;
};

void add_analysis_flags(CLI::App* app, AnalysisFlags& f, bool windows) {
    app->add_option("--config", f.config_path, "JSON config file; flags override its values");
    app->add_option("--input", f.input, "Input CSV/TSV file");
    app->add_option("--column", f.column, "Value column: header name or 0-based index");
    app->add_flag("--log-prices", f.log_prices, "Take natural log of prices before differencing");
    app->add_option("--p-grid", f.p_grid, "Moment orders START:STOP:STEP");
    app->add_option("--taus", f.taus, "Comma-separated tau grid");
    app->add_option("--tau-max", f.tau_max, "Tau grid of powers of two up to this value");
    app->add_option("--fit-range", f.fit_range, "Scaling range LO:HI in samples");
    app->add_option("--n", f.n, "GESS reference order n");
    app->add_option("--q", f.q, "GESS order q");
    app->add_option("--delta-p", f.delta_p, "Step in p for the delta-rho recursion");
    app->add_option("--p-start", f.p_start, "First p of the delta-rho sequence");
    app->add_option("--p-end", f.p_end, "Last p carrying a delta-rho value");
    app->add_option("--flat-p", f.flat_p, "Comma-separated p set for F");
    app->add_option("--flat-q", f.flat_q, "Comma-separated q set for F");
    app->add_option("--tau0", f.tau0, "Reference lag for F");
    app->add_option("--threshold", f.threshold, "Flatness threshold on |F| (log2 units)");
    app->add_option("--c-range", f.c_range, "p range LO:HI averaged for C");
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--workers", f.workers, "Worker threads for the moment table")->check(CLI::Range(1u, 256u));
    app->add_option("--write-config", f.write_config, "Also write the effective config to this path");
    if (windows) {
        app->add_option("--windows", f.windows, "Split into this many equal windows");
        app->add_option("--window-ranges", f.ranges, "Explicit windows BEGIN:END,BEGIN:END,...");
    } else {
        app->add_option("--scatter-csv", f.scatter, "Also write the delta-rho pairs to this CSV path");
    }
}

RunConfig effective_config(const CLI::App* app, const AnalysisFlags& f) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : RunConfig::load(f.config_path);
    auto given = [&](const char* name) { return app->count(name) > 0; };
    std::vector<std::string> errs;
    auto guard = [&](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            errs.push_back(e.detail());
        }
    };
    if (given("--input"))
        c.input = f.input;
    if (given("--column"))
        c.column = f.column;
    if (given("--log-prices"))
        c.log_prices = f.log_prices;
    if (given("--p-grid"))
        guard([&] {
            const auto parts = split(f.p_grid, ':');
            if (parts.size() != 3)
                throw Error(ErrorCode::ConfigInvalid, "--p-grid expects START:STOP:STEP");
            c.p_grid = {to_double(parts[0], "--p-grid"), to_double(parts[1], "--p-grid"),
                        to_double(parts[2], "--p-grid")};
        });
    if (given("--taus") && given("--tau-max"))
        errs.push_back("--taus and --tau-max are mutually exclusive");
    if (given("--taus"))
        guard([&] {
            c.tau_grid.clear();
            for (const auto& t : split(f.taus, ','))
                c.tau_grid.push_back(to_size(t, "--taus"));
        });
    if (given("--tau-max"))
        c.tau_grid = MomentGrid::pow2_taus(f.tau_max);
    if (given("--fit-range"))
        guard([&] {
            const auto [lo, hi] = parse_pair(f.fit_range, "--fit-range");
            c.fit_range = {to_size(lo, "--fit-range"), to_size(hi, "--fit-range")};
        });
    if (given("--n"))
        c.n = f.n;
    if (given("--q"))
        c.q = f.q;
    if (given("--delta-p"))
        c.delta_p = f.delta_p;
    if (given("--p-start"))
        c.p_start = f.p_start;
    if (given("--p-end"))
        c.p_end = f.p_end;
    if (given("--flat-p"))
        guard([&] { c.flat_p_set = parse_doubles(f.flat_p, "--flat-p"); });
    if (given("--flat-q"))
        guard([&] { c.flat_q_set = parse_doubles(f.flat_q, "--flat-q"); });
    if (given("--tau0"))
        c.tau0 = f.tau0;
    if (given("--threshold"))
        c.threshold = f.threshold;
    if (given("--c-range"))
        guard([&] {
            const auto [lo, hi] = parse_pair(f.c_range, "--c-range");
            c.c_p_lo = to_double(lo, "--c-range");
            c.c_p_hi = to_double(hi, "--c-range");
        });
    if (given("--out"))
        c.output_dir = f.out;
    if (app->get_option_no_throw("--windows") && given("--windows"))
        c.window_count = f.windows;
    if (app->get_option_no_throw("--window-ranges") && given("--window-ranges"))
        guard([&] {
            c.window_ranges.clear();
            for (const auto& r : split(f.ranges, ',')) {
                const auto [b, e] = parse_pair(r, "--window-ranges");
                c.window_ranges.push_back({to_size(b, "--window-ranges"), to_size(e, "--window-ranges")});
            }
        });
    if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs)
            msg += (msg.empty() ? "" : "; ") + e;
        throw Error(ErrorCode::ConfigInvalid, msg);
    }
    return c;
}

int write_synthetic(const SyntheticSeries& s, const std::string& out) {
    const fs::path path(out);
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    fs::path side = path;
    side.replace_extension(".json");
    if (side == path)
        side = path.string() + ".json";
    atomic_write(path, to_csv(s.series, "value"));
    atomic_write(side, sidecar_json(s, MomentGrid::defaults().p).dump(2) + "\n");
    return 0;
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Structure-function scaling and hierarchy analysis of time series"};
    app.require_subcommand(1);

    AnalysisFlags af, wf;
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze one series and write report files");
    add_analysis_flags(analyze_cmd, af, false);
    auto* windows_cmd = app.add_subcommand("windows", "Analyze windows of a series independently");
    add_analysis_flags(windows_cmd, wf, true);

    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic series");
    synth_cmd->require_subcommand(1);
    CascadeSpec cs;
    std::string cascade_out, fbm_out;
    auto* cascade_cmd = synth_cmd->add_subcommand("cascade", "Log-Poisson multiplicative cascade");
    cascade_cmd->add_option("--beta", cs.beta, "Hierarchy parameter in (0,1)")->required();
    cascade_cmd->add_option("--C", cs.C, "Codimension parameter > 0")->required();
    cascade_cmd->add_option("--h0", cs.h0, "Exponent of the largest fluctuations, in [0,1)");
    cascade_cmd->add_option("--levels", cs.levels, "Dyadic depth; length is 2^levels")->required();
    cascade_cmd->add_option("--seed", cs.seed, "Random seed")->required();
    cascade_cmd->add_option("--out", cascade_out, "Output CSV path")->required();
    double H = 0.5;
    std::size_t length = 0;
    std::uint64_t fbm_seed = 0;
    auto* fbm_cmd = synth_cmd->add_subcommand("fbm", "Fractional Brownian motion (exact covariance)");
    fbm_cmd->add_option("--H", H, "Hurst exponent in (0,1)")->required();
    fbm_cmd->add_option("--length", length, "Number of samples")->required();
    fbm_cmd->add_option("--seed", fbm_seed, "Random seed")->required();
    fbm_cmd->add_option("--out", fbm_out, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*analyze_cmd || *windows_cmd) {
            const bool win = static_cast<bool>(*windows_cmd);
            auto* cmd = win ? windows_cmd : analyze_cmd;
            const auto& flags = win ? wf : af;
            const auto cfg = effective_config(cmd, flags);
            if (!flags.write_config.empty())
                atomic_write(flags.write_config, cfg.canonical());
            const int rc = win ? cmd_windows(cfg, flags.workers) : cmd_analyze(cfg, flags.workers);
            if (rc == 0 && !win && !flags.scatter.empty()) {
                // the analysis already succeeded; copy its pair file
                atomic_write(flags.scatter, read_file(fs::path(cfg.output_dir) / "scatter.csv"));
            }
            return rc;
        }
        if (*cascade_cmd)
            return write_synthetic(generate_cascade(cs), cascade_out);
        if (*fbm_cmd)
            return write_synthetic(generate_fbm(H, length, fbm_seed), fbm_out);
    } catch (const Error& e) {
        report_error(e);
        return exit_code_for(e);
    }
    return 1;
}

} // namespace slh
