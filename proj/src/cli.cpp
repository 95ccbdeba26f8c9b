#include "twistlab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "twistlab/curves.hpp"
#include "twistlab/error.hpp"
#include "twistlab/format.hpp"
#include "twistlab/maps.hpp"
#include "twistlab/stats.hpp"
#include "twistlab/torsion.hpp"

namespace twistlab::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_reals(const std::string& text, std::size_t expected, const std::string& flag)
{
    std::vector<double> vals;
    std::string_view rest(text);
    for (;;) {
        const auto comma = rest.find(',');
        try {
            vals.push_back(parse_real(rest.substr(0, comma)));
        } catch (const InvalidArgument&) {
            throw UsageError(flag + ": malformed number list '" + text + "'");
        }
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    if (vals.size() != expected) {
        throw UsageError(flag + " expects " + std::to_string(expected) + " comma-separated numbers, got '" + text + "'");
    }
    return vals;
}

Point parse_point(const std::string& text, const std::string& flag)
{
    const auto v = parse_reals(text, 2, flag);
    return {v[0], v[1]};
}

Box parse_box(const std::string& text, const std::string& flag)
{
    const auto v = parse_reals(text, 4, flag);
    Box b{v[0], v[1], v[2], v[3]};
    if (!b.valid()) {
        throw UsageError(flag + " needs x0 < x1 and y0 < y1");
    }
    return b;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text, const std::string& flag)
{
    const auto x = text.find('x');
    try {
        if (x == std::string::npos) {
            throw InvalidArgument("");
        }
        const double gx = parse_real(std::string_view(text).substr(0, x));
        const double gy = parse_real(std::string_view(text).substr(x + 1));
        if (gx < 1 || gy < 1 || gx != std::floor(gx) || gy != std::floor(gy)) {
            throw InvalidArgument("");
        }
        return {static_cast<std::size_t>(gx), static_cast<std::size_t>(gy)};
    } catch (const InvalidArgument&) {
        throw UsageError(flag + " expects <Rx>x<Ry> with positive integers, got '" + text + "'");
    }
}

std::vector<Rational> parse_rationals(const std::string& text)
{
    std::vector<Rational> out;
    std::string_view rest(text);
    for (;;) {
        const auto comma = rest.find(',');
        try {
            out.push_back(parse_rational(std::string(rest.substr(0, comma))));
        } catch (const InvalidArgument& e) {
            throw UsageError(std::string("--rho: ") + e.what());
        }
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    std::sort(out.begin(), out.end(), [](Rational a, Rational b) { return a.value() < b.value(); });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i] == out[i - 1]) {
            throw UsageError("--rho lists " + std::to_string(out[i].p) + "/" + std::to_string(out[i].q) + " twice");
        }
    }
    return out;
}

LiftedMap parse_map(const std::string& spec)
{
    try {
        return parse_map_spec(spec);
    } catch (const InvalidArgument& e) {
        throw UsageError(std::string("--map: ") + e.what());
    }
}

// Output files are opened before any computation so a bad path fails fast.
std::optional<std::ofstream> open_output(const std::string& path)
{
    if (path.empty()) {
        return std::nullopt;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw Error("cannot write output file '" + path + "'");
    }
    return f;
}

void write_output(std::optional<std::ofstream>& f, const std::string& text, const std::string& path)
{
    if (!f) {
        return;
    }
    *f << text;
    f->flush();
    if (!*f) {
        throw Error("failed writing '" + path + "'");
    }
}

class Summary {
public:
    explicit Summary(std::ostream& out) : out_(out) {}
    template <typename T>
    Summary& put(const std::string& key, const T& value)
    {
        out_ << key << " = " << value << '\n';
        return *this;
    }
    Summary& real(const std::string& key, double value) { return put(key, format_real(value)); }

private:
    std::ostream& out_;
};

struct Flags {
    std::string map;
    std::string point;
    std::string point2;
    std::string vector = "0,1";
    std::string box;
    std::string grid;
    std::string yrange = "-2,2";
    std::string window;
    std::string rho;
    std::string out;
    std::string svg;
    long n = 0;
    long horizon = 10'000;
    long returns = 1;
    long cap = 1'000'000;
    long period = 1;
    std::size_t samples = 10'000;
    std::size_t res = 256;
    double eps = 0.05;
    double tol = kDefaultRootTol;
    std::optional<double> scale;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

int cmd_trace(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const Point p = parse_point(f.point, "--point");
    const Point w = parse_point(f.vector, "--vector");
    if (f.n < 1) {
        throw UsageError("--n must be >= 1");
    }
    if (w.x == 0.0 && w.y == 0.0) {
        throw UsageError("--vector must be non-zero");
    }
    auto file = open_output(f.out);

    const TorsionTrace trace = torsion_trace(map, p, w, f.n);
    const auto over = detect_overconjugate(map, p, f.n);
    const auto conj = detect_conjugate(map, p, f.n);

    if (file) {
        const std::vector<Point> orbit = iterate(map, p, f.n);
        std::ostringstream csv;
        csv << "# map=" << map.describe() << "\n# point=" << format_real(p.x) << ',' << format_real(p.y)
            << "\n# vector=" << format_real(w.x) << ',' << format_real(w.y) << "\n# n=" << f.n << '\n';
        csv << "step,x,y,delta,cumulative\n";
        for (long i = 0; i < f.n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            csv << i << ',' << format_real(orbit[k].x) << ',' << format_real(orbit[k].y) << ','
                << format_real(trace.steps[k]) << ',' << format_real(trace.cumulative[k + 1]) << '\n';
        }
        write_output(file, csv.str(), f.out);
    }

    Summary s(out);
    s.put("map", map.describe()).put("n", f.n);
    s.real("cumulative", trace.cumulative.back()).real("torsion", trace.torsion());
    s.put("first_overconjugate", over ? std::to_string(*over) : "none");
    s.put("first_conjugate", conj ? std::to_string(conj->n) + " (k=" + std::to_string(conj->k) + ")" : "none");
    return kExitOk;
}

ScanConfig scan_config(const Flags& f, ScanMode mode)
{
    ScanConfig cfg;
    cfg.box = parse_box(f.box, "--box");
    cfg.mode = mode;
    if (mode == ScanMode::Grid) {
        std::tie(cfg.grid_x, cfg.grid_y) = parse_grid(f.grid, "--grid");
    } else {
        cfg.samples = f.samples;
        cfg.seed = f.seed;
    }
    cfg.horizon = f.n;
    cfg.eps = f.eps;
    cfg.period = f.period;
    cfg.threads = f.threads;
    if (cfg.horizon < 1 || !(cfg.eps > 0.0) || cfg.sample_count() == 0) {
        throw UsageError("--n must be >= 1, --eps > 0 and the scan non-empty");
    }
    return cfg;
}

void print_summary(Summary& s, const ScanResult& r)
{
    const MeasureEstimate& m = r.summary;
    s.put("map", r.map_spec).put("samples", r.records.size()).put("count", m.count);
    s.real("fraction_negative", m.fraction_negative).real("fraction_nonzero", m.fraction_nonzero);
    s.real("mean_torsion", m.mean_torsion).real("stderr_negative", m.stderr_negative);
    s.real("stderr_torsion", m.stderr_torsion);
}

int cmd_field(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const ScanConfig cfg = scan_config(f, ScanMode::Grid);
    auto csv = open_output(f.out);
    auto svg = open_output(f.svg);

    const ScanResult r = torsion_field(map, cfg);
    write_output(csv, scan_to_csv(r), f.out);
    if (svg) {
        HeatmapOptions opts;
        opts.scale = f.scale;
        write_output(svg, render_heatmap(r, opts), f.svg);
    }
    Summary s(out);
    print_summary(s, r);
    return kExitOk;
}

int cmd_measure(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const ScanConfig cfg = scan_config(f, ScanMode::MonteCarlo);
    auto csv = open_output(f.out);

    const ScanResult r = torsion_field(map, cfg);
    write_output(csv, scan_to_csv(r), f.out);
    const IntegralEstimate integral = torsion_integral(r);
    Summary s(out);
    print_summary(s, r);
    s.put("seed", cfg.seed);
    s.real("torsion_integral", integral.value).real("torsion_integral_stderr", integral.std_error);
    return kExitOk;
}

int cmd_flux(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    if (f.res < 2) {
        throw UsageError("--res must be >= 2");
    }
    Summary(out).put("map", map.describe()).put("res", f.res).real("flux", flux(map, f.res, f.tol));
    return kExitOk;
}

int cmd_psi(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const auto rationals = parse_rationals(f.rho);
    if (f.res < 1 || !(f.tol > 0.0)) {
        throw UsageError("--res must be >= 1 and --tol > 0");
    }
    auto file = open_output(f.out);

    std::vector<PeriodicCurve> curves;
    curves.push_back(psi1_curve(map, f.res, f.tol));
    curves.push_back(psi_minus1_curve(map, f.res, f.tol));
    const PsiFamily fam = psi_family(map, rationals, f.res, f.tol);
    for (const auto& e : fam.entries) {
        curves.push_back(e.curve);
    }
    write_output(file, curves_to_csv(curves, map.describe()), f.out);

    Summary s(out);
    s.put("map", map.describe()).put("res", f.res);
    for (const auto& e : fam.entries) {
        const std::string key = "psi(" + std::to_string(e.rho.p) + "/" + std::to_string(e.rho.q) + ")";
        s.put(key, std::string(e.curve.fixed_ok ? "fixed" : "NOT_FIXED") +
                       " max_residual=" + format_real(e.curve.max_residual()) +
                       " max_fixed_residual=" + format_real(e.curve.max_fixed_residual()) +
                       " lipschitz=" + format_real(e.lipschitz));
    }
    s.put("monotone", fam.monotone_ok ? "yes" : "no");
    return kExitOk;
}

int cmd_probe(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    ProbeConfig cfg;
    std::tie(cfg.grid_x, cfg.grid_y) = parse_grid(f.grid.empty() ? "64x64" : f.grid, "--grid");
    const auto yr = parse_reals(f.yrange, 2, "--yrange");
    cfg.y_min = yr[0];
    cfg.y_max = yr[1];
    cfg.horizon = f.horizon;
    cfg.rationals = parse_rationals(f.rho.empty() ? "0/1" : f.rho);
    cfg.curve_resolution = f.res;
    cfg.threads = f.threads;
    if (!(cfg.y_min < cfg.y_max) || cfg.horizon < 1) {
        throw UsageError("--yrange needs lo < hi and --horizon >= 1");
    }
    auto file = open_output(f.out);

    const ProbeReport rep = integrability_probe(map, cfg);
    Summary s(out);
    s.put("verdict", to_string(rep.verdict)).put("map", map.describe()).real("flux", rep.flux);
    if (rep.witness) {
        s.put("witness", format_real(rep.witness->x) + "," + format_real(rep.witness->y));
        s.put("witness_time", rep.witness_time).put("witnesses", rep.witnesses);
    }
    if (rep.family) {
        std::vector<PeriodicCurve> curves;
        for (const auto& e : rep.family->entries) {
            curves.push_back(e.curve);
        }
        write_output(file, curves_to_csv(curves, map.describe()), f.out);
        s.real("max_residual", rep.family->max_residual());
        s.real("max_fixed_residual", rep.family->max_fixed_residual());
        s.put("all_fixed", rep.family->all_fixed() ? "yes" : "no");
        s.put("monotone", rep.family->monotone_ok ? "yes" : "no");
    }
    return kExitOk;
}

int cmd_rotation(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const Point p = parse_point(f.point, "--point");
    if (f.n < 1) {
        throw UsageError("--n must be >= 1");
    }
    const RotationEstimate r = rotation_number(map, p, f.n);
    Summary(out).put("map", map.describe()).put("n", r.horizon).real("rotation", r.value);
    return kExitOk;
}

int cmd_classify(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const Point p = parse_point(f.point, "--point");
    if (f.n < 1) {
        throw UsageError("--n must be >= 1");
    }
    Summary(out).put("map", map.describe()).put("n", f.n).put("class", to_string(classify_monotonicity(map, p, f.n)));
    return kExitOk;
}

int cmd_linking(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const Point p = parse_point(f.point, "--point");
    const Point q = parse_point(f.point2, "--point2");
    if (f.n < 1) {
        throw UsageError("--n must be >= 1");
    }
    const LinkingResult r = linking_number(map, p, q, f.n);
    Summary(out).put("map", map.describe()).put("n", f.n).real("linking", r.value).put(
        "near_half_turn", r.near_half_turn ? "yes" : "no");
    return kExitOk;
}

int cmd_return_check(const Flags& f, std::ostream& out)
{
    const LiftedMap map = parse_map(f.map);
    const Box w = parse_box(f.window, "--window");
    const Point p = parse_point(f.point, "--point");
    if (f.returns < 1 || f.cap < 1 || f.period < 1) {
        throw UsageError("--returns, --cap and --period must be >= 1");
    }
    const FirstReturnReport r = first_return_torsion(map, w, p, f.returns, f.cap, f.period);
    Summary s(out);
    s.put("map", map.describe()).put("returns", r.return_times.size()).put("complete", r.complete ? "yes" : "no");
    std::string taus;
    for (std::size_t i = 0; i < r.return_times.size(); ++i) {
        taus += (i ? "," : "") + std::to_string(r.return_times[i]);
    }
    s.put("return_times", taus).put("total_time", r.total_time);
    s.real("ratio", r.ratio).real("direct", r.direct).real("discrepancy", r.discrepancy);
    s.put("identity", r.identity_holds ? "holds" : "FAILS");
    return r.identity_holds ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Torsion and conjugate points of area-preserving twist maps", "twistlab"};
    app.require_subcommand(1, 1);
    Flags f;

    const auto add_map = [&](CLI::App* c) { c->add_option("--map", f.map, "map spec: shear | drift:c=<r> | std:k=<r> | genfun:a1=<r>,...")->required(); };
    const auto add_out = [&](CLI::App* c) { c->add_option("--out", f.out, "output file"); };
    const auto add_threads = [&](CLI::App* c) { c->add_option("--threads", f.threads, "worker threads (0 = all cores)"); };

    auto* trace = app.add_subcommand("trace", "angle cocycle along one tangent orbit");
    add_map(trace);
    trace->add_option("--point", f.point, "x,y")->required();
    trace->add_option("--vector", f.vector, "dx,dy (default 0,1)");
    trace->add_option("--n", f.n, "steps")->required();
    add_out(trace);

    auto* field = app.add_subcommand("field", "finite-time torsion over a grid");
    add_map(field);
    field->add_option("--box", f.box, "x0,x1,y0,y1")->required();
    field->add_option("--grid", f.grid, "<Rx>x<Ry>")->required();
    field->add_option("--n", f.n, "horizon")->required();
    field->add_option("--eps", f.eps, "non-zero torsion threshold");
    field->add_option("--svg", f.svg, "heatmap output");
    field->add_option("--scale", f.scale, "symmetric colour bound");
    add_out(field);
    add_threads(field);

    auto* measure = app.add_subcommand("measure", "Monte-Carlo measure of non-zero torsion");
    add_map(measure);
    measure->add_option("--box", f.box, "x0,x1,y0,y1")->required();
    measure->add_option("--samples", f.samples, "sample count");
    measure->add_option("--n", f.n, "horizon")->required();
    measure->add_option("--eps", f.eps, "non-zero torsion threshold");
    measure->add_option("--seed", f.seed, "u64 seed");
    add_out(measure);
    add_threads(measure);

    auto* fluxc = app.add_subcommand("flux", "flux between Psi_1 and Psi_-1");
    add_map(fluxc);
    fluxc->add_option("--res", f.res, "quadrature nodes");
    add_out(fluxc);

    auto* psi = app.add_subcommand("psi", "characteristic curves and the psi_rho family");
    add_map(psi);
    psi->add_option("--rho", f.rho, "comma list of p/q")->required();
    psi->add_option("--res", f.res, "grid resolution");
    psi->add_option("--tol", f.tol, "root tolerance in y");
    add_out(psi);

    auto* probe = app.add_subcommand("probe", "C0-integrability probe");
    add_map(probe);
    probe->add_option("--grid", f.grid, "<Rx>x<Ry>");
    probe->add_option("--yrange", f.yrange, "lo,hi");
    probe->add_option("--horizon", f.horizon, "steps per grid point");
    probe->add_option("--rho", f.rho, "comma list of p/q");
    probe->add_option("--res", f.res, "curve resolution");
    add_out(probe);
    add_threads(probe);

    auto* rotation = app.add_subcommand("rotation", "finite-time rotation number");
    add_map(rotation);
    rotation->add_option("--point", f.point, "x,y")->required();
    rotation->add_option("--n", f.n, "steps")->required();
    add_out(rotation);

    auto* classify = app.add_subcommand("classify", "orbit monotonicity class");
    add_map(classify);
    classify->add_option("--point", f.point, "x,y")->required();
    classify->add_option("--n", f.n, "half-width of the orbit segment")->required();
    add_out(classify);

    auto* linking = app.add_subcommand("linking", "finite-time linking number");
    add_map(linking);
    linking->add_option("--point", f.point, "x,y")->required();
    linking->add_option("--point2", f.point2, "x,y")->required();
    linking->add_option("--n", f.n, "steps")->required();
    add_out(linking);

    auto* ret = app.add_subcommand("return-check", "first-return torsion identity");
    add_map(ret);
    ret->add_option("--window", f.window, "x0,x1,y0,y1")->required();
    ret->add_option("--point", f.point, "x,y")->required();
    ret->add_option("--returns", f.returns, "number of returns");
    ret->add_option("--cap", f.cap, "step cap");
    ret->add_option("--period", f.period, "period M (g = f^M)");
    add_out(ret);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    // Subcommands whose summary is the only output still honour --out by
    // writing the same block to the file.
    std::ostringstream block;
    try {
        int status = kExitOk;
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "trace") {
            status = cmd_trace(f, block);
        } else if (name == "field") {
            status = cmd_field(f, block);
        } else if (name == "measure") {
            status = cmd_measure(f, block);
        } else if (name == "psi") {
            status = cmd_psi(f, block);
        } else if (name == "probe") {
            status = cmd_probe(f, block);
        } else {
            auto file = open_output(f.out);
            if (name == "flux") {
                status = cmd_flux(f, block);
            } else if (name == "rotation") {
                status = cmd_rotation(f, block);
            } else if (name == "classify") {
                status = cmd_classify(f, block);
            } else if (name == "linking") {
                status = cmd_linking(f, block);
            } else {
                status = cmd_return_check(f, block);
            }
            write_output(file, block.str(), f.out);
        }
        out << block.str();
        return status;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        out << block.str();
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace twistlab::cli
