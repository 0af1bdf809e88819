#include "mcbound/mcbound.h"

#include "mcbound/errors.hpp"
#include "mcbound/field.hpp"
#include "mcbound/net.hpp"
#include "mcbound/oracle.hpp"
#include "mcbound/poly2d.hpp"
#include "mcbound/root1d.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

struct mcb_field {
    std::unique_ptr<mcbound::MultiClassField> impl;
};

struct mcb_network {
    mcbound::EdgeNetwork net;
    std::string trace;
};

namespace {

thread_local std::string g_last_error;

mcb_status fail(mcb_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <class F>
mcb_status guarded(F&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const mcbound::ParseError& e) {
        return fail(MCB_PARSE_ERROR, e.what());
    } catch (const mcbound::ValidationError& e) {
        return fail(MCB_VALIDATION_ERROR, e.what());
    } catch (const mcbound::InvalidInput& e) {
        return fail(MCB_INVALID_ARGUMENT, e.what());
    } catch (const mcbound::NumericalFailure& e) {
        return fail(MCB_NUMERICAL_ERROR, e.what());
    } catch (const mcbound::NotWatertight& e) {
        return fail(MCB_NOT_WATERTIGHT, e.what());
    } catch (const mcbound::Error& e) {
        return fail(MCB_INTERNAL_ERROR, e.what());
    } catch (const std::bad_alloc&) {
        return fail(MCB_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(MCB_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(MCB_INTERNAL_ERROR, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_line(const mcbound::PolyTraceEvent& e) {
    return "{\"action\":\"" + e.action + "\",\"class\":\"" + mcbound::rect_tag_name(e.tag) + "\",\"rect\":[" +
           number(e.rect.x_lo) + "," + number(e.rect.y_lo) + "," + number(e.rect.x_hi) + "," + number(e.rect.y_hi) +
           "],\"s_size\":" + std::to_string(e.normal_size) + ",\"stack\":\"" +
           (e.stack == mcbound::PolyTraceEvent::Stack::Verification ? "verification" : "normal") +
           "\",\"v_size\":" + std::to_string(e.verification_size) + "}\n";
}

} // namespace

extern "C" {

const char* mcb_last_error(void) { return g_last_error.c_str(); }

const char* mcb_status_name(mcb_status status) {
    switch (status) {
    case MCB_OK: return "ok";
    case MCB_INVALID_ARGUMENT: return "invalid argument";
    case MCB_PARSE_ERROR: return "parse error";
    case MCB_VALIDATION_ERROR: return "validation error";
    case MCB_NUMERICAL_ERROR: return "numerical failure";
    case MCB_NOT_WATERTIGHT: return "not watertight";
    case MCB_IO_ERROR: return "i/o error";
    case MCB_INTERNAL_ERROR: return "internal error";
    }
    return "unknown status";
}

void mcb_string_free(char* s) { std::free(s); }

mcb_status mcb_field_from_json(const char* json, mcb_field** out) {
    if (!json || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto f = std::make_unique<mcb_field>();
        f->impl = mcbound::make_field(mcbound::parse_field_spec(json));
        *out = f.release();
        return MCB_OK;
    });
}

void mcb_field_destroy(mcb_field* field) { delete field; }

mcb_status mcb_field_class_count(const mcb_field* field, size_t* out) {
    if (!field || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    *out = field->impl->class_count();
    return MCB_OK;
}

mcb_status mcb_field_evaluate(const mcb_field* field, double x, double y, double* probs, size_t n) {
    if (!field || !probs) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto p = field->impl->evaluate({x, y});
        if (n != p.size()) return fail(MCB_INVALID_ARGUMENT, "output buffer size must equal the class count");
        for (size_t i = 0; i < n; ++i) probs[i] = p[i];
        return MCB_OK;
    });
}

mcb_status mcb_field_classify(const mcb_field* field, double x, double y, uint32_t* out) {
    if (!field || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = field->impl->classify({x, y}).index;
        return MCB_OK;
    });
}

mcb_status mcb_field_has_reference_boundary(const mcb_field* field, int* out) {
    if (!field || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    *out = field->impl->reference_boundary().kind != mcbound::ReferenceBoundary::Kind::None;
    return MCB_OK;
}

mcb_status mcb_generate_field_spec(const char* kind, size_t k, uint64_t seed, char** out_json) {
    if (!kind || !out_json) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto fk = mcbound::field_kind_from_name(kind);
        if (!fk) return fail(MCB_INVALID_ARGUMENT, std::string("unsupported field kind '") + kind + "'");
        *out_json = dup_string(mcbound::field_spec_to_json(mcbound::generate_field_spec(*fk, k, seed)));
        return MCB_OK;
    });
}

void mcb_extract_params_default(mcb_extract_params* params) {
    if (!params) return;
    params->x_lo = 0.0;
    params->y_lo = 0.0;
    params->x_hi = 1.0;
    params->y_hi = 1.0;
    params->vn = 2;
    params->delta = 1e-3;
    params->epsilon = 1e-12;
    params->junction_max_iterations = 50;
    params->junction_max_evaluations = 500;
    params->record_trace = 0;
}

mcb_status mcb_extract(const mcb_field* field, const mcb_extract_params* params, mcb_network** out) {
    if (!field || !params || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const mcbound::Rect root{params->x_lo, params->y_lo, params->x_hi, params->y_hi};
        mcbound::PolygoniseParams p;
        p.vn = params->vn;
        p.delta = (params->delta > 0.0 && std::isfinite(params->delta)) ? params->delta
                                                                        : std::numeric_limits<double>::infinity();
        p.epsilon = params->epsilon;
        p.junction_max_iterations = params->junction_max_iterations;
        p.junction_max_evaluations = params->junction_max_evaluations;
        auto net = std::make_unique<mcb_network>();
        if (params->record_trace) {
            std::string* sink = &net->trace;
            p.trace = [sink](const mcbound::PolyTraceEvent& e) { *sink += trace_line(e); };
        }
        net->net = mcbound::polygonise(*field->impl, root, p).network;
        *out = net.release();
        return MCB_OK;
    });
}

void mcb_network_destroy(mcb_network* net) { delete net; }

mcb_status mcb_network_from_json(const char* json, mcb_network** out) {
    if (!json || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto net = std::make_unique<mcb_network>();
        net->net = mcbound::network_from_json(json);
        *out = net.release();
        return MCB_OK;
    });
}

mcb_status mcb_network_to_json(const mcb_network* net, char** out) {
    if (!net || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(mcbound::to_json(net->net));
        return MCB_OK;
    });
}

mcb_status mcb_network_to_svg(const mcb_network* net, double width_px, char** out) {
    if (!net || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    if (!(width_px > 0.0)) return fail(MCB_INVALID_ARGUMENT, "SVG width must be positive");
    return guarded([&] {
        mcbound::SvgStyle style;
        style.width_px = width_px;
        *out = dup_string(mcbound::to_svg(net->net, style));
        return MCB_OK;
    });
}

mcb_status mcb_network_trace_jsonl(const mcb_network* net, char** out) {
    if (!net || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(net->trace);
        return MCB_OK;
    });
}

mcb_status mcb_network_counts(const mcb_network* net, size_t* vertices, size_t* segments, size_t* warnings) {
    if (!net) return fail(MCB_INVALID_ARGUMENT, "null argument");
    if (vertices) *vertices = net->net.vertices.size();
    if (segments) *segments = net->net.segments.size();
    if (warnings) *warnings = net->net.warnings.size();
    return MCB_OK;
}

mcb_status mcb_network_watertight_report(const mcb_network* net, int* watertight, char** report_json) {
    if (!net || !watertight) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto report = mcbound::check_watertight(net->net);
        *watertight = report.watertight() ? 1 : 0;
        if (report_json) *report_json = dup_string(report.to_json());
        return MCB_OK;
    });
}

void mcb_compare_params_default(mcb_compare_params* params) {
    if (!params) return;
    params->resolution = 1000;
    params->exclusion = 2e-12;
    params->boundary_samples = 4000;
}

mcb_status mcb_compare(const mcb_field* field, const mcb_network* net, const mcb_compare_params* params,
                       double* agreement, char** metrics_json) {
    if (!field || !net || !params) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto grid = mcbound::rasterize(*field->impl, net->net.bounds, params->resolution, params->resolution);
        const auto r = mcbound::region_agreement(net->net, grid, params->exclusion);
        nlohmann::ordered_json j;
        j["agreement"] = r.fraction;
        j["compared"] = r.compared;
        j["excluded"] = r.excluded;
        const auto& boundary = field->impl->reference_boundary();
        if (boundary.kind != mcbound::ReferenceBoundary::Kind::None) {
            const double h = mcbound::boundary_hausdorff(net->net, boundary, params->boundary_samples);
            if (std::isfinite(h)) {
                j["hausdorff"] = h;
            } else {
                j["hausdorff"] = nullptr;
            }
        }
        j["resolution"] = params->resolution;
        j["segments"] = net->net.segments.size();
        if (agreement) *agreement = r.fraction;
        if (metrics_json) *metrics_json = dup_string(j.dump());
        return MCB_OK;
    });
}

mcb_status mcb_find_roots_json(const mcb_field* field, char axis, double fixed, double lo, double hi, int vn,
                               double epsilon, char** out) {
    if (!field || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    if (axis != 'x' && axis != 'y') return fail(MCB_INVALID_ARGUMENT, "axis must be 'x' or 'y'");
    return guarded([&] {
        if (!(lo < hi)) return fail(MCB_INVALID_ARGUMENT, "interval must satisfy lo < hi");
        if (!(epsilon > 0.0)) return fail(MCB_INVALID_ARGUMENT, "epsilon must be positive");
        if (vn < 1) return fail(MCB_INVALID_ARGUMENT, "verification depth must be at least 1");
        const mcbound::AxisLine line{axis == 'x' ? mcbound::Axis::X : mcbound::Axis::Y, fixed};
        const auto scan = mcbound::find_roots(*field->impl, line, {lo, hi}, vn, epsilon);
        std::string s = "{\"axis\":\"" + std::string(1, axis) + "\",\"fixed\":" + number(fixed) + ",\"roots\":[";
        for (size_t i = 0; i < scan.roots.size(); ++i) {
            const auto& r = scan.roots[i];
            if (i) s += ",";
            s += "{\"left\":" + std::to_string(r.left_class.index) + ",\"pos\":" + number(r.position) +
                 ",\"right\":" + std::to_string(r.right_class.index) + "}";
        }
        s += "],\"warnings\":" + nlohmann::json(scan.warnings).dump() + "}\n";
        *out = dup_string(s);
        return MCB_OK;
    });
}

mcb_status mcb_rasterize_text(const mcb_field* field, double x_lo, double y_lo, double x_hi, double y_hi, size_t nx,
                              size_t ny, char** out) {
    if (!field || !out) return fail(MCB_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(mcbound::grid_to_text(mcbound::rasterize(*field->impl, {x_lo, y_lo, x_hi, y_hi}, nx, ny)));
        return MCB_OK;
    });
}

} // extern "C"
