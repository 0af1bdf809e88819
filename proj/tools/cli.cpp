#include "cli.hpp"

#include "mcbound/mcbound.h"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

namespace mcbound_cli {

namespace {

struct CString {
    char* p = nullptr;
    ~CString() { mcb_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

using FieldPtr = std::unique_ptr<mcb_field, decltype(&mcb_field_destroy)>;
using NetworkPtr = std::unique_ptr<mcb_network, decltype(&mcb_network_destroy)>;

class Failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void check(mcb_status s, const std::string& what) {
    if (s != MCB_OK) throw Failure(what + ": " + mcb_status_name(s) + ": " + mcb_last_error());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure("cannot write '" + path + "'");
    out << content;
    if (!out.flush()) throw Failure("cannot write '" + path + "'");
}

double parse_number(const std::string& text, const std::string& flag) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw Failure(flag + ": '" + text + "' is not a number");
    return v;
}

struct Bounds {
    double x_lo = 0.0, y_lo = 0.0, x_hi = 1.0, y_hi = 1.0;
    double width() const { return x_hi - x_lo; }
    double shorter() const { return std::min(x_hi - x_lo, y_hi - y_lo); }
};

Bounds parse_bounds(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(parse_number(item, "--bounds"));
    if (v.size() != 4) throw Failure("--bounds expects x0,y0,x1,y1");
    Bounds b{v[0], v[1], v[2], v[3]};
    if (!(b.x_lo < b.x_hi && b.y_lo < b.y_hi)) throw Failure("--bounds needs x0 < x1 and y0 < y1");
    return b;
}

FieldPtr load_field(const std::string& path) {
    mcb_field* f = nullptr;
    check(mcb_field_from_json(read_file(path).c_str(), &f), "field '" + path + "'");
    return FieldPtr(f, mcb_field_destroy);
}

struct ExtractOptions {
    std::string field;
    std::string bounds = "0,0,1,1";
    int vn = 2;
    std::string delta;
    std::string epsilon;
    std::string out_json;
    std::string out_svg;
    std::string trace;
};

void add_extract_flags(CLI::App* cmd, ExtractOptions& o, bool field_required) {
    auto* f = cmd->add_option("--field", o.field, "Field spec JSON file");
    if (field_required) f->required();
    cmd->add_option("--bounds", o.bounds, "Domain x0,y0,x1,y1")->capture_default_str();
    cmd->add_option("--vn", o.vn, "Verification depth")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--delta", o.delta, "Geometric threshold, or 'off' (default 1e-3 * width)");
    cmd->add_option("--epsilon", o.epsilon, "Subdivision limit (default 1e-12 * width)");
}

struct Resolved {
    mcb_extract_params params;
    Bounds bounds;
};

Resolved resolve(const ExtractOptions& o) {
    Resolved r;
    r.bounds = parse_bounds(o.bounds);
    mcb_extract_params_default(&r.params);
    r.params.x_lo = r.bounds.x_lo;
    r.params.y_lo = r.bounds.y_lo;
    r.params.x_hi = r.bounds.x_hi;
    r.params.y_hi = r.bounds.y_hi;
    r.params.vn = o.vn;
    if (o.delta.empty()) {
        r.params.delta = 1e-3 * r.bounds.width();
    } else if (o.delta == "off") {
        r.params.delta = std::numeric_limits<double>::infinity();
    } else {
        r.params.delta = parse_number(o.delta, "--delta");
        if (!(r.params.delta > 0.0)) throw Failure("--delta must be positive or 'off'");
    }
    r.params.epsilon = o.epsilon.empty() ? 1e-12 * r.bounds.width() : parse_number(o.epsilon, "--epsilon");
    if (!(r.params.epsilon > 0.0)) throw Failure("--epsilon must be positive");
    if (!(r.params.epsilon < r.bounds.shorter())) throw Failure("--epsilon must be smaller than the domain sides");
    return r;
}

NetworkPtr extract(const mcb_field* field, mcb_extract_params params, bool trace) {
    params.record_trace = trace ? 1 : 0;
    mcb_network* n = nullptr;
    check(mcb_extract(field, &params, &n), "extraction");
    return NetworkPtr(n, mcb_network_destroy);
}

int cmd_extract(const ExtractOptions& o, std::ostream& out, std::ostream& err) {
    const Resolved r = resolve(o);
    const FieldPtr field = load_field(o.field);
    const NetworkPtr net = extract(field.get(), r.params, !o.trace.empty());

    CString json;
    check(mcb_network_to_json(net.get(), &json.p), "serialisation");
    if (o.out_json.empty()) {
        out << json.str();
    } else {
        write_file(o.out_json, json.str());
    }
    if (!o.out_svg.empty()) {
        CString svg;
        check(mcb_network_to_svg(net.get(), 800.0, &svg.p), "SVG rendering");
        write_file(o.out_svg, svg.str());
    }
    if (!o.trace.empty()) {
        CString trace;
        check(mcb_network_trace_jsonl(net.get(), &trace.p), "trace");
        write_file(o.trace, trace.str());
    }

    size_t warnings = 0;
    check(mcb_network_counts(net.get(), nullptr, nullptr, &warnings), "network");
    if (warnings > 0) {
        err << "extract: " << warnings << " warning(s); see the \"warnings\" array in the output\n";
        return 2;
    }
    return 0;
}

int cmd_compare(const ExtractOptions& o, const std::string& network_path, std::size_t resolution, double threshold,
                std::ostream& out, std::ostream& err) {
    const Resolved r = resolve(o);
    const FieldPtr field = load_field(o.field);
    NetworkPtr net(nullptr, mcb_network_destroy);
    if (network_path.empty()) {
        net = extract(field.get(), r.params, false);
    } else {
        mcb_network* n = nullptr;
        check(mcb_network_from_json(read_file(network_path).c_str(), &n), "network '" + network_path + "'");
        net.reset(n);
    }

    int watertight = 0;
    CString report;
    check(mcb_network_watertight_report(net.get(), &watertight, &report.p), "watertightness check");
    if (!watertight) {
        out << report.str() << "\n";
        err << "compare: network is not watertight\n";
        return 1;
    }

    mcb_compare_params cp;
    mcb_compare_params_default(&cp);
    cp.resolution = resolution;
    cp.exclusion = 2.0 * r.params.epsilon;
    double agreement = 0.0;
    CString metrics;
    check(mcb_compare(field.get(), net.get(), &cp, &agreement, &metrics.p), "comparison");
    out << metrics.str() << "\n";
    if (agreement < threshold) {
        err << "compare: agreement " << agreement << " below threshold " << threshold << "\n";
        return 1;
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Boundary extraction for multi-class implicit fields", "mcbound"};
    app.require_subcommand(1);

    ExtractOptions ex;
    auto* extract_cmd = app.add_subcommand("extract", "Extract the boundary network of a field");
    add_extract_flags(extract_cmd, ex, true);
    extract_cmd->add_option("--out-json", ex.out_json, "Network JSON output (default: stdout)");
    extract_cmd->add_option("--out-svg", ex.out_svg, "SVG rendering output");
    extract_cmd->add_option("--trace", ex.trace, "JSON-lines trace of processed rectangles");

    ExtractOptions cmp;
    std::string network_path;
    std::size_t oracle_res = 1000;
    double threshold = 0.999;
    auto* compare_cmd = app.add_subcommand("compare", "Compare a network against a dense rasterisation");
    add_extract_flags(compare_cmd, cmp, true);
    compare_cmd->add_option("--network", network_path, "Network JSON (default: extract from the field)");
    compare_cmd->add_option("--oracle-res", oracle_res, "Oracle cells per axis")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{20000}));
    compare_cmd->add_option("--agreement-threshold", threshold, "Minimum agreement for exit 0")->capture_default_str();

    std::string kind;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-field", "Write a random field spec");
    gen_cmd->add_option("--kind", kind, "softmax_rbf, smoothed_voronoi, linear_planes or sigmoid_1d")->required();
    gen_cmd->add_option("--k", k, "Number of classes")->required();
    gen_cmd->add_option("--seed", seed, "Random seed")->required();
    gen_cmd->add_option("--out", gen_out, "Output file (default: stdout)");

    std::string roots_field;
    std::string roots_axis = "x";
    double fixed = 0.0, lo = 0.0, hi = 1.0;
    int roots_vn = 2;
    std::string roots_eps;
    auto* roots_cmd = app.add_subcommand("roots", "Find class transitions along an axis-aligned line");
    roots_cmd->add_option("--field", roots_field, "Field spec JSON file")->required();
    roots_cmd->add_option("--axis", roots_axis, "Varying coordinate, x or y")->check(CLI::IsMember({"x", "y"}));
    roots_cmd->add_option("--fixed", fixed, "Value of the other coordinate");
    roots_cmd->add_option("--lo", lo, "Interval start")->capture_default_str();
    roots_cmd->add_option("--hi", hi, "Interval end")->capture_default_str();
    roots_cmd->add_option("--vn", roots_vn, "Verification depth")->capture_default_str()->check(CLI::PositiveNumber);
    roots_cmd->add_option("--epsilon", roots_eps, "Interval limit (default 1e-12 * length)");

    std::string raster_field;
    std::string raster_bounds = "0,0,1,1";
    std::size_t raster_res = 100;
    std::string raster_out;
    auto* raster_cmd = app.add_subcommand("raster", "Dump the dense class grid as text");
    raster_cmd->add_option("--field", raster_field, "Field spec JSON file")->required();
    raster_cmd->add_option("--bounds", raster_bounds, "Domain x0,y0,x1,y1")->capture_default_str();
    raster_cmd->add_option("--res", raster_res, "Cells per axis")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{20000}));
    raster_cmd->add_option("--out", raster_out, "Output file (default: stdout)");

    // CLI11 consumes a reversed argument list without the program name
    std::vector<std::string> reversed;
    for (std::size_t i = args.size(); i > 1; --i) reversed.push_back(args[i - 1]);
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*extract_cmd) return cmd_extract(ex, out, err);
        if (*compare_cmd) return cmd_compare(cmp, network_path, oracle_res, threshold, out, err);
        if (*gen_cmd) {
            CString spec;
            check(mcb_generate_field_spec(kind.c_str(), k, seed, &spec.p), "gen-field");
            if (gen_out.empty()) {
                out << spec.str();
            } else {
                write_file(gen_out, spec.str());
            }
            return 0;
        }
        if (*roots_cmd) {
            if (!(lo < hi)) throw Failure("--lo must be smaller than --hi");
            const double eps = roots_eps.empty() ? 1e-12 * (hi - lo) : parse_number(roots_eps, "--epsilon");
            const FieldPtr field = load_field(roots_field);
            CString json;
            check(mcb_find_roots_json(field.get(), roots_axis[0], fixed, lo, hi, roots_vn, eps, &json.p), "roots");
            out << json.str();
            return 0;
        }
        if (*raster_cmd) {
            const Bounds b = parse_bounds(raster_bounds);
            const FieldPtr field = load_field(raster_field);
            CString text;
            check(mcb_rasterize_text(field.get(), b.x_lo, b.y_lo, b.x_hi, b.y_hi, raster_res, raster_res, &text.p),
                  "raster");
            if (raster_out.empty()) {
                out << text.str();
            } else {
                write_file(raster_out, text.str());
            }
            return 0;
        }
    } catch (const Failure& e) {
        err << "mcbound: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace mcbound_cli
