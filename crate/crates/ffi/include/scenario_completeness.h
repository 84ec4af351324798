#ifndef SCENARIO_COMPLETENESS_H
#define SCENARIO_COMPLETENESS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScExportMode {
  SC_EXPORT_MODE_DOCUMENT = 0,
  SC_EXPORT_MODE_RENDERABLE = 1,
} ScExportMode;

// Node status; `None` for nodes without one (context nodes, or a graph
// without root goals for the top-goal query).
typedef enum ScNodeStatus {
  SC_NODE_STATUS_NONE = 0,
  SC_NODE_STATUS_SUPPORTED = 1,
  SC_NODE_STATUS_UNDERMINED = 2,
  SC_NODE_STATUS_UNDETERMINED = 3,
  SC_NODE_STATUS_REFUTED = 4,
  SC_NODE_STATUS_CONFIRMED = 5,
  SC_NODE_STATUS_OPEN = 6,
} ScNodeStatus;

typedef enum ScOutcome {
  SC_OUTCOME_REFUTING = 0,
  SC_OUTCOME_CONFIRMING = 1,
  SC_OUTCOME_INCONCLUSIVE = 2,
} ScOutcome;

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_UTF8 = 2,
  SC_STATUS_PARSE_ERROR = 3,
  SC_STATUS_INVALID_GRAPH = 4,
  SC_STATUS_UNKNOWN_NODE = 5,
  SC_STATUS_INVALID_ARGUMENT = 6,
  SC_STATUS_COVERAGE_ERROR = 7,
  SC_STATUS_INDEX_OUT_OF_RANGE = 8,
  SC_STATUS_PANIC = 9,
} ScStatus;

// Opaque discovery curve.
typedef struct ScCurve ScCurve;

// Opaque argument graph.
typedef struct ScGraph ScGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into this library on the same thread.
const char *sc_last_error(void);

// Library version, a static string.
const char *sc_version(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void sc_string_free(char *s);

// Parses a GSN document into a new graph handle.
//
// # Safety
// `document` must be a NUL-terminated string; `out` a valid pointer.
enum ScStatus sc_graph_parse(const char *document, struct ScGraph **out);

// # Safety
// `graph` must be NULL or a handle from [`sc_graph_parse`], not yet freed.
void sc_graph_free(struct ScGraph *graph);

// Structural validation. Writes the number of violations to `count` and,
// if `report` is not NULL, one violation per line into a new string.
//
// # Safety
// `graph` must be a live handle; `count` a valid pointer; `report` NULL or
// a valid pointer.
enum ScStatus sc_graph_validate(const struct ScGraph *graph, size_t *count, char **report);

// Adds a verdict to an evidence node of the graph in place. `outcome` is
// an [`ScOutcome`] value.
//
// # Safety
// `graph` must be a live handle; string arguments NUL-terminated.
enum ScStatus sc_graph_attach_verdict(struct ScGraph *graph,
                                      const char *evidence_id,
                                      int32_t outcome,
                                      const char *source,
                                      const char *detail,
                                      int64_t timestamp);

// Recomputes every node status in place. Fails without changing the graph
// if it is structurally invalid.
//
// # Safety
// `graph` must be a live handle.
enum ScStatus sc_graph_propagate(struct ScGraph *graph);

// # Safety
// `graph` must be a live handle; `node_id` NUL-terminated; `out` valid.
enum ScStatus sc_graph_node_status(const struct ScGraph *graph,
                                   const char *node_id,
                                   enum ScNodeStatus *out);

// Aggregate status of the root goals.
//
// # Safety
// `graph` must be a live handle; `out` valid.
enum ScStatus sc_graph_top_goal_status(const struct ScGraph *graph, enum ScNodeStatus *out);

// Writes the graph as a GSN document or a TGF rendering; `mode` is an
// [`ScExportMode`] value.
//
// # Safety
// `graph` must be a live handle; `out` valid.
enum ScStatus sc_graph_export(const struct ScGraph *graph, int32_t mode, char **out);

// Good–Turing coverage `1 − f1/N` of `count` labels.
//
// # Safety
// `labels` must point to `count` NUL-terminated strings; `out` valid.
enum ScStatus sc_good_turing(const char *const *labels, size_t count, double *out);

// Seeded discovery curve over the given sample sizes.
//
// # Safety
// `labels` must point to `count` NUL-terminated strings, `sizes` to
// `size_count` values; `out` valid.
enum ScStatus sc_discovery_curve(const char *const *labels,
                                 size_t count,
                                 const size_t *sizes,
                                 size_t size_count,
                                 size_t repetitions,
                                 uint64_t seed,
                                 struct ScCurve **out);

// # Safety
// `curve` must be NULL or a live handle.
void sc_curve_free(struct ScCurve *curve);

// Number of points on the curve; 0 for NULL.
//
// # Safety
// `curve` must be NULL or a live handle.
size_t sc_curve_len(const struct ScCurve *curve);

// # Safety
// `curve` must be a live handle; out pointers valid.
enum ScStatus sc_curve_point(const struct ScCurve *curve,
                             size_t index,
                             size_t *sample_size,
                             double *mean_distinct,
                             double *stddev);

// Least-squares fit of `K(1 − exp(−n/τ))` to the curve.
//
// # Safety
// `curve` must be a live handle; out pointers valid.
enum ScStatus sc_curve_fit(const struct ScCurve *curve, double *k, double *tau, double *rmse);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCENARIO_COMPLETENESS_H */
