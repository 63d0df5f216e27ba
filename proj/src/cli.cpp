#include "twistrank/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "twistrank/csv.hpp"
#include "twistrank/family.hpp"
#include "twistrank/fit.hpp"
#include "twistrank/moments.hpp"
#include "twistrank/sieve.hpp"
#include "twistrank/signs.hpp"

namespace twistrank {

namespace {

using nlohmann::json;

struct Options {
    i64 A = 0;
    i64 B = 2;
    double alpha = 0.008;
    double c1 = 0.0;
    double c2 = 0.0;
    std::string X;
    std::string x_grid;
    std::string mode = "region";
    unsigned shards = 1;
    std::string out;
    std::string summary;
    std::string cache_dir;
    std::string base_url;
    bool offline = false;
    std::optional<u64> N_E;
    std::optional<int> omega_E;
    u64 seed = 0x243f6a8885a308d3ULL;

    u64 p_max = 500;
    int k_max = 6;
    u64 a = 1, q = 1, m = 1;
    u64 P_cut = 10000;
    u64 w = 1;
    u64 w_max = 0;
    std::string ells = "1,5,7";
    std::size_t residue_index = 0;
    std::string input;
};

// Accepts plain integers and exact scientific forms such as 1e7.
u64 parse_count(const std::string& text) {
    if (text.find_first_of("eE.") == std::string::npos) return csv::parse_int<u64>(text);
    const double v = csv::parse_double(text);
    if (!(v >= 1.0) || v > 9.2e18 || std::floor(v) != v) {
        throw Error(ErrorCode::InvalidArgument, "not a positive integer: " + text);
    }
    return static_cast<u64>(v);
}

std::vector<u64> parse_list(const std::string& text) {
    std::vector<u64> out;
    for (const auto& part : csv::split(text)) {
        if (!part.empty()) out.push_back(parse_count(part));
    }
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty list");
    return out;
}

std::vector<u64> grid_of(const Options& o) {
    if (!o.x_grid.empty()) return parse_list(o.x_grid);
    if (!o.X.empty()) return {parse_count(o.X)};
    throw Error(ErrorCode::InvalidArgument, "--X or --x-grid is required");
}

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw Error(ErrorCode::Io, "cannot open " + path);
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }
    void close() {
        stream_->flush();
        if (!*stream_) throw Error(ErrorCode::Io, "write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

// Summaries go to --summary, else to the report stream when the report went to
// a file, else to the diagnostic stream.
std::ostream& summary_fallback(const Options& o, std::ostream& out, std::ostream& err) {
    return o.out.empty() ? err : out;
}

CurveParams curve_of(const Options& o) { return validate_curve(o.A, o.B); }

RegionParams region_of(const Options& o, double max_alpha) {
    return make_region(o.alpha, o.c1, o.c2, parse_region_mode(o.mode), max_alpha);
}

BaseCurveData base_of(const Options& o) {
    FetchOptions f = fetch_options_from_env();
    if (!o.cache_dir.empty()) f.cache_dir = o.cache_dir;
    if (!o.base_url.empty()) f.base_url = o.base_url;
    f.offline = o.offline;
    if (o.N_E && o.omega_E) f.config = make_base_data(*o.N_E, *o.omega_E);
    else if (o.N_E || o.omega_E) throw Error(ErrorCode::InvalidArgument, "--N-E and --omega-E go together");
    return fetch_base_data(o.A, o.B, f);
}

double growth_scale(u64 X) {
    const double x = static_cast<double>(X);
    return std::sqrt(x) * std::log(x);
}

int cmd_census(const Options& o, std::ostream& out, std::ostream& err) {
    const CurveParams c = curve_of(o);
    const RegionParams rp = region_of(o, 1.0 / 24.0);
    const auto grid = grid_of(o);
    Sink report(o.out, out);
    Sink summary(o.summary, summary_fallback(o, out, err));
    if (grid.size() == 1) {
        const Census census = build_census(c, rp, grid[0], o.shards);
        write_census_csv(report.get(), census_rows(census));
        const auto certified =
            std::count_if(census.begin(), census.end(), [](const auto& kv) { return kv.second.certified; });
        const json j = {{"X", grid[0]},
                        {"count", census.size()},
                        {"ratio", grid[0] > 1 ? static_cast<double>(census.size()) / growth_scale(grid[0]) : 0.0},
                        {"certified_count", certified}};
        summary.get() << j.dump() << '\n';
    } else {
        const auto rows = growth_table(c, rp, grid, o.shards);
        report.get() << "X,count,certified,ratio,w_ratio\n";
        json arr = json::array();
        for (const auto& r : rows) {
            report.get() << r.X << ',' << r.count << ',' << r.certified << ',' << csv::format_double(r.ratio) << ','
                         << csv::format_double(r.w_ratio) << '\n';
            arr.push_back({{"X", r.X}, {"count", r.count}, {"ratio", r.ratio}, {"certified_count", r.certified}});
        }
        summary.get() << arr.dump() << '\n';
    }
    report.close();
    summary.close();
    return kExitOk;
}

int cmd_moments(const Options& o, std::ostream& out, std::ostream&) {
    const CurveParams c = curve_of(o);
    const RegionParams rp = region_of(o, 1.0 / 120.0);
    const BaseCurveData base = base_of(o);
    Sink report(o.out, out);
    write_moments_csv(report.get(), moment_table(c, rp, grid_of(o), base, o.shards));
    report.close();
    return kExitOk;
}

std::string rational_text(const mpq_class& q) { return q.get_den() == 1 ? q.get_num().get_str() : q.get_str(); }

std::vector<SieveRow> sieve_check_rho(const Options& o) {
    const CurveParams c = curve_of(o);
    std::vector<SieveRow> rows;
    for (auto p32 : primes_up_to(static_cast<std::uint32_t>(o.p_max))) {
        const u64 p = p32;
        const double bound = stewart_bound(c, p);
        for (int k = 1; k <= o.k_max; ++k) {
            const u64 r = rho_prime_power(c, p, k);
            const double res = static_cast<double>(r) - bound;
            rows.push_back({"rho", "p=" + std::to_string(p) + ";k=" + std::to_string(k), std::to_string(r), bound,
                            res, std::nullopt, std::nullopt, std::nullopt});
        }
    }
    if (!o.X.empty() || !o.x_grid.empty()) {
        for (u64 X : grid_of(o)) {
            const u64 s = rho_summatory(c, X, 2);
            rows.push_back({"rho_sum", "X=" + std::to_string(X) + ";k=2", std::to_string(s), static_cast<double>(X),
                            static_cast<double>(s) - static_cast<double>(X),
                            static_cast<double>(s) / static_cast<double>(X), std::nullopt, std::nullopt});
        }
    }
    return rows;
}

std::vector<SieveRow> sieve_mt_sum(const Options& o, std::ostream& note) {
    std::vector<SieveRow> rows;
    const auto grid = grid_of(o);
    const auto exact = mt_sum_sweep(grid, o.a, o.q, o.m);
    for (u64 X : grid) {
        const mpq_class& value = exact.at(X);
        const Interval main = mt_main_term(X, o.q, o.m, o.P_cut);
        const double residual = value.get_d() - main.mid();
        note << "mt_sum(X=" << X << ") = " << rational_text(value) << " = " << csv::format_double(value.get_d())
             << '\n';
        rows.push_back({"mt_sum",
                        "X=" + std::to_string(X) + ";a=" + std::to_string(o.a) + ";q=" + std::to_string(o.q) +
                            ";m=" + std::to_string(o.m) + ";P_cut=" + std::to_string(o.P_cut),
                        rational_text(value), main.mid(), residual,
                        residual / std::sqrt(static_cast<double>(X)), main.lo, main.hi});
    }
    return rows;
}

std::vector<SieveRow> sieve_lw(const Options& o, u64 N_E) {
    const CurveParams c = curve_of(o);
    std::vector<SieveRow> rows;
    const u64 top = std::max(o.w, o.w_max);
    for (u64 w = o.w; w <= top; ++w) {
        const Interval iv = l_of_w(c, w, N_E, o.P_cut);
        rows.push_back({"L_w", "w=" + std::to_string(w) + ";P_cut=" + std::to_string(o.P_cut),
                        csv::format_double(iv.mid()), std::nullopt, std::nullopt, std::nullopt, iv.lo, iv.hi});
    }
    return rows;
}

std::vector<SieveRow> sieve_nwl(const Options& o, u64 N_E) {
    const CurveParams c = curve_of(o);
    const DerivedConstants k = derive_constants(c, o.alpha, o.c1, o.c2, N_E, o.P_cut);
    const auto all = admissible_residues(c, N_E, o.residue_index + 1);
    if (all.size() <= o.residue_index) throw Error(ErrorCode::BadResidues, "residue index out of range");
    const Residues res = all[o.residue_index];
    std::vector<SieveRow> rows;
    const u64 top = std::max(o.w, o.w_max);
    for (u64 X : grid_of(o)) {
        const double scale = std::pow(static_cast<double>(X), 0.375);
        for (u64 ell : parse_list(o.ells)) {
            for (u64 w = o.w; w <= top; ++w) {
                const std::string params = "w=" + std::to_string(w) + ";l=" + std::to_string(ell) +
                                           ";X=" + std::to_string(X) + ";u0=" + std::to_string(res.u0) +
                                           ";v0=" + std::to_string(res.v0) + ";w0=" + std::to_string(res.w0);
                const LatticeCount n = n_wl_count(c, k, w, ell, X, res);
                const double nm = n_wl_main(c, k, w, ell, X);
                const double nr = static_cast<double>(n.count) - nm;
                rows.push_back({n.bad_residues ? "N_wl_bad" : "N_wl", params, std::to_string(n.count), nm, nr,
                                nr / scale, std::nullopt, std::nullopt});
                const LatticeSum v = v_wl_sum(k, w, ell, X, res);
                const double vm = v_wl_main(k, w, ell, X);
                const double vr = static_cast<double>(v.value) - vm;
                rows.push_back({v.bad_residues ? "V_wl_bad" : "V_wl", params,
                                csv::format_double(static_cast<double>(v.value)), vm, vr, vr / scale, std::nullopt,
                                std::nullopt});
            }
        }
    }
    return rows;
}

std::vector<SieveRow> sieve_constants(const Options& o, u64 N_E) {
    const CurveParams c = curve_of(o);
    const DerivedConstants k = derive_constants(c, o.alpha, o.c1, o.c2, N_E, o.P_cut);
    const std::string params = "alpha=" + csv::format_double(o.alpha) + ";c2=" + csv::format_double(o.c2) +
                               ";N_E=" + std::to_string(N_E) + ";P_cut=" + std::to_string(o.P_cut);
    auto row = [&](const std::string& name, const std::string& value) {
        return SieveRow{name, params, value, std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    };
    std::vector<SieveRow> rows{row("c3", std::to_string(k.c3)), row("c4", std::to_string(k.c4)),
                               row("c5", csv::format_double(k.c5)), row("c6", csv::format_double(k.c6))};
    SieveRow c7 = row("c7", csv::format_double(k.c7));
    c7.tail_lo = k.c7_interval.lo;
    c7.tail_hi = k.c7_interval.hi;
    rows.push_back(c7);
    rows.push_back(row("c8", csv::format_double(k.c8)));
    rows.push_back(row("c9_lower", csv::format_double(k.c9_lower)));
    return rows;
}

u64 conductor_for_sieve(const Options& o) {
    if (o.N_E) return *o.N_E;
    return base_of(o).N_E;
}

int cmd_sieve(const std::string& which, const Options& o, std::ostream& out, std::ostream& err) {
    if (!(o.alpha > 0.0) || !(o.alpha < 1.0 / 56.0)) {
        throw Error(ErrorCode::InvalidArgument, "sieve experiments need alpha in (0, 1/56)");
    }
    Sink report(o.out, out);
    Sink note(o.summary, summary_fallback(o, out, err));
    std::vector<SieveRow> rows;
    if (which == "check-rho") rows = sieve_check_rho(o);
    else if (which == "mt-sum") rows = sieve_mt_sum(o, note.get());
    else if (which == "lw") rows = sieve_lw(o, conductor_for_sieve(o));
    else if (which == "nwl") rows = sieve_nwl(o, conductor_for_sieve(o));
    else rows = sieve_constants(o, conductor_for_sieve(o));
    write_sieve_csv(report.get(), rows);
    report.close();
    note.close();
    return kExitOk;
}

int cmd_signs(const Options& o, std::ostream& out, std::ostream& err) {
    const BaseCurveData base = base_of(o);
    const u64 q = sign_modulus(base);
    std::optional<SignedMoment> moment;
    if (!o.X.empty()) {
        const CurveParams c = curve_of(o);
        moment = signed_first_moment(c, region_of(o, 1.0 / 56.0), parse_count(o.X), base, o.shards);
    }
    Sink report(o.out, out);
    Sink summary(o.summary, summary_fallback(o, out, err));
    report.get() << "a,sign,representative,checked,constant,S_Q_a\n";
    std::size_t plus = 0, minus = 0, undefined = 0;
    for (u64 a = 1; a < q; ++a) {
        if (gcd(a, q) != 1) continue;
        std::string sign = "undefined", rep, checked = "0", constant;
        try {
            const ClassSign s = class_sign(a, base);
            sign = std::to_string(s.sign);
            rep = std::to_string(s.representative);
            checked = std::to_string(s.checked);
            constant = s.constant ? "1" : "0";
            (s.sign > 0 ? plus : minus) += 1;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoValidRepresentative) throw;
            ++undefined;
        }
        std::string mass;
        if (moment) {
            const auto it = moment->by_class.find(a);
            mass = std::to_string(it == moment->by_class.end() ? 0 : it->second);
        }
        report.get() << a << ',' << sign << ',' << rep << ',' << checked << ',' << constant << ',' << mass << '\n';
    }
    json j = {{"N_E", base.N_E},
              {"omega_E", base.omega_E},
              {"source", std::string(to_string(base.source))},
              {"classes_plus", plus},
              {"classes_minus", minus},
              {"classes_undefined", undefined}};
    if (moment) {
        j["SQ_plus"] = moment->plus;
        j["SQ_minus"] = moment->minus;
        j["excluded"] = moment->excluded;
    }
    summary.get() << j.dump() << '\n';
    report.close();
    summary.close();
    return kExitOk;
}

std::vector<FitPoint> read_growth_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    const auto header = csv::next_line(in);
    if (!header || header->rfind("X,count", 0) != 0) throw Error(ErrorCode::Io, "expected a growth table");
    std::vector<FitPoint> pts;
    while (const auto line = csv::next_line(in)) {
        const auto f = csv::split(*line);
        if (f.size() < 2) throw Error(ErrorCode::Io, "growth row needs X and count");
        pts.push_back({csv::parse_int<u64>(f[0]), csv::parse_double(f[1])});
    }
    return pts;
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream&) {
    std::vector<FitPoint> pts;
    if (!o.input.empty()) {
        pts = read_growth_csv(o.input);
    } else {
        const auto rows = growth_table(curve_of(o), region_of(o, 1.0 / 24.0), grid_of(o), o.shards);
        for (const auto& r : rows) pts.push_back({r.X, static_cast<double>(r.count)});
    }
    const FitReport f = fit_growth(pts);
    json ratios = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) ratios.push_back({{"X", pts[i].X}, {"ratio", f.ratios[i]}});
    const json j = {{"c_hat", f.c_hat},
                    {"ratios", ratios},
                    {"max_rel_deviation", f.max_rel_deviation},
                    {"deviation_flag", f.deviation_flag}};
    Sink report(o.out, out);
    report.get() << j.dump(2) << '\n';
    report.close();
    return kExitOk;
}

void add_common(CLI::App& app, Options& o) {
    app.add_option("--A", o.A, "coefficient A");
    app.add_option("--B", o.B, "coefficient B");
    app.add_option("--alpha", o.alpha, "region exponent parameter");
    app.add_option("--c1", o.c1, "lower region constant");
    app.add_option("--c2", o.c2, "upper region constant");
    app.add_option("--X", o.X, "bound on d");
    app.add_option("--x-grid", o.x_grid, "comma-separated increasing X values");
    app.add_option("--mode", o.mode, "region | certified | relaxed");
    app.add_option("--shards", o.shards, "worker threads for the enumeration")->check(CLI::Range(1u, 256u));
    app.add_option("--out", o.out, "report path (default: standard output)");
    app.add_option("--summary", o.summary, "summary path");
    app.add_option("--cache-dir", o.cache_dir, "base-curve data cache");
    app.add_option("--base-url", o.base_url, "curve database endpoint");
    app.add_flag("--offline", o.offline, "never touch the network");
    app.add_option("--N-E", o.N_E, "conductor override");
    app.add_option("--omega-E", o.omega_E, "root number override");
    app.add_option("--seed", o.seed, "seed for randomized factorization steps");
}

}  // namespace

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Overflow: return kExitOverflow;
        case ErrorCode::Io: return kExitIo;
        case ErrorCode::NetworkUnavailable:
        case ErrorCode::CurveNotFound:
        case ErrorCode::CacheMiss: return kExitNetwork;
        case ErrorCode::NonConvergence:
        case ErrorCode::PointNotOnCurve: return kExitFailure;
        default: return kExitConfig;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Quadratic twist families with small-height points"};
    app.set_config("--config", "", "key=value configuration file; flags win");
    app.require_subcommand(1);
    add_common(app, o);
    app.fallthrough();

    auto* census = app.add_subcommand("census", "per-d census and growth table");
    auto* moments = app.add_subcommand("moments", "second moment, diagonal split and signed moments");
    auto* sieve = app.add_subcommand("sieve", "square-free sieve quantities");
    auto* signs = app.add_subcommand("signs", "root-number classes mod 4 N_E");
    auto* fit = app.add_subcommand("fit", "least-squares fit of count = c X^{1/2} log X");
    fit->add_option("--input", o.input, "growth table CSV from `census --x-grid`");

    sieve->require_subcommand(1);
    std::string sieve_cmd;
    for (const char* name : {"check-rho", "mt-sum", "lw", "nwl", "constants"}) {
        auto* sub = sieve->add_subcommand(name);
        sub->fallthrough();
        sub->callback([&sieve_cmd, name] { sieve_cmd = name; });
    }
    sieve->fallthrough();
    sieve->add_option("--p-max", o.p_max, "largest prime for check-rho");
    sieve->add_option("--k-max", o.k_max, "largest exponent for check-rho");
    sieve->add_option("--a", o.a, "residue class for mt-sum");
    sieve->add_option("--q", o.q, "modulus for mt-sum");
    sieve->add_option("--m", o.m, "coprimality modulus for mt-sum");
    sieve->add_option("--P-cut", o.P_cut, "Euler product truncation");
    sieve->add_option("--w", o.w, "first w");
    sieve->add_option("--w-max", o.w_max, "last w");
    sieve->add_option("--ells", o.ells, "comma-separated l values for nwl");
    sieve->add_option("--residue-index", o.residue_index, "which admissible residue triple (0 = least)");

    std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv_tail.begin(), argv_tail.end());
    try {
        app.parse(argv_tail);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*census) return cmd_census(o, out, err);
        if (*moments) return cmd_moments(o, out, err);
        if (*sieve) return cmd_sieve(sieve_cmd, o, out, err);
        if (*signs) return cmd_signs(o, out, err);
        if (*fit) return cmd_fit(o, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitConfig;
}

}  // namespace twistrank
