/* C interface to the mcbound boundary extractor. Every function returns an
 * mcb_status; on failure mcb_last_error() describes the problem for the calling
 * thread. Strings handed out by the library are released with mcb_string_free. */
#ifndef MCBOUND_H
#define MCBOUND_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MCBOUND_BUILDING)
#define MCB_API __declspec(dllexport)
#else
#define MCB_API __declspec(dllimport)
#endif
#else
#define MCB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcb_status {
    MCB_OK = 0,
    MCB_INVALID_ARGUMENT = 1,
    MCB_PARSE_ERROR = 2,
    MCB_VALIDATION_ERROR = 3,
    MCB_NUMERICAL_ERROR = 4,
    MCB_NOT_WATERTIGHT = 5,
    MCB_IO_ERROR = 6,
    MCB_INTERNAL_ERROR = 7
} mcb_status;

typedef struct mcb_field mcb_field;
typedef struct mcb_network mcb_network;

MCB_API const char* mcb_last_error(void);
MCB_API const char* mcb_status_name(mcb_status status);
MCB_API void mcb_string_free(char* s);

/* Fields */
MCB_API mcb_status mcb_field_from_json(const char* json, mcb_field** out);
MCB_API void mcb_field_destroy(mcb_field* field);
MCB_API mcb_status mcb_field_class_count(const mcb_field* field, size_t* out);
/* Writes class_count probabilities into probs. */
MCB_API mcb_status mcb_field_evaluate(const mcb_field* field, double x, double y, double* probs, size_t n);
MCB_API mcb_status mcb_field_classify(const mcb_field* field, double x, double y, uint32_t* out);
MCB_API mcb_status mcb_field_has_reference_boundary(const mcb_field* field, int* out);

/* kind: softmax_rbf, smoothed_voronoi, linear_planes or sigmoid_1d. */
MCB_API mcb_status mcb_generate_field_spec(const char* kind, size_t k, uint64_t seed, char** out_json);

/* Extraction */
typedef struct mcb_extract_params {
    double x_lo, y_lo, x_hi, y_hi;
    int vn;
    double delta;   /* <= 0 or infinite disables the geometric criterion */
    double epsilon;
    int junction_max_iterations;
    int junction_max_evaluations;
    int record_trace; /* nonzero keeps a JSON-lines trace on the network */
} mcb_extract_params;

/* Unit square, vn 2, delta 1e-3 * width, epsilon 1e-12 * width. */
MCB_API void mcb_extract_params_default(mcb_extract_params* params);
MCB_API mcb_status mcb_extract(const mcb_field* field, const mcb_extract_params* params, mcb_network** out);

MCB_API void mcb_network_destroy(mcb_network* net);
MCB_API mcb_status mcb_network_from_json(const char* json, mcb_network** out);
MCB_API mcb_status mcb_network_to_json(const mcb_network* net, char** out);
MCB_API mcb_status mcb_network_to_svg(const mcb_network* net, double width_px, char** out);
MCB_API mcb_status mcb_network_trace_jsonl(const mcb_network* net, char** out);
MCB_API mcb_status mcb_network_counts(const mcb_network* net, size_t* vertices, size_t* segments, size_t* warnings);
/* Writes 1 to *watertight when the network passes, and the report as JSON. */
MCB_API mcb_status mcb_network_watertight_report(const mcb_network* net, int* watertight, char** report_json);

/* Oracle comparison */
typedef struct mcb_compare_params {
    size_t resolution;  /* cells per axis */
    double exclusion;   /* cells closer than this to a segment are skipped */
    size_t boundary_samples;
} mcb_compare_params;

MCB_API void mcb_compare_params_default(mcb_compare_params* params);
/* Metrics JSON: agreement, compared, excluded, and hausdorff when the field has a
 * reference boundary. Fails with MCB_NOT_WATERTIGHT for a broken network. */
MCB_API mcb_status mcb_compare(const mcb_field* field, const mcb_network* net, const mcb_compare_params* params,
                               double* agreement, char** metrics_json);

/* Debug helpers */
/* axis 'x' or 'y'; roots on the line where the other coordinate equals `fixed`. */
MCB_API mcb_status mcb_find_roots_json(const mcb_field* field, char axis, double fixed, double lo, double hi,
                                       int vn, double epsilon, char** out);
MCB_API mcb_status mcb_rasterize_text(const mcb_field* field, double x_lo, double y_lo, double x_hi, double y_hi,
                                      size_t nx, size_t ny, char** out);

#ifdef __cplusplus
}
#endif

#endif
