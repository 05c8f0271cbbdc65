#ifndef LOOMING_H
#define LOOMING_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LoomingStatus {
  LOOMING_STATUS_OK = 0,
  LOOMING_STATUS_NULL_POINTER = 1,
  LOOMING_STATUS_INVALID_ARGUMENT = 2,
  LOOMING_STATUS_PARSE_ERROR = 3,
  LOOMING_STATUS_INVALID_PARAMS = 4,
  LOOMING_STATUS_DIMENSION_MISMATCH = 5,
  LOOMING_STATUS_ALREADY_PRIMED = 6,
  LOOMING_STATUS_NOT_PRIMED = 7,
  LOOMING_STATUS_BUFFER_TOO_SMALL = 8,
  LOOMING_STATUS_INTERNAL = 9,
} LoomingStatus;

/*
 Opaque pipeline handle.
 */
typedef struct LoomingPipeline LoomingPipeline;

/*
 Scalar outputs of one processed frame.
 */
typedef struct LoomingFrameReport {
  uint64_t t;
  double u;
  double out;
  uint64_t spike;
  bool collision;
  size_t n_targets;
} LoomingFrameReport;

/*
 One clustered target of the latest frame.
 */
typedef struct LoomingTarget {
  double x;
  double y;
  double phi;
  double energy;
  size_t n_points;
} LoomingTarget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates a pipeline with default parameters for `width` x `height` frames.

 # Safety
 `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum LoomingStatus looming_pipeline_new(size_t width,
                                        size_t height,
                                        bool gate_targets,
                                        struct LoomingPipeline **out);

/*
 Creates a pipeline from a `key = value` parameter document. Keys it omits
 keep their defaults.

 # Safety
 `config` must be a NUL-terminated string and `out` a valid pointer to
 writable storage for one handle pointer.
 */
enum LoomingStatus looming_pipeline_from_config(const char *config,
                                                bool gate_targets,
                                                struct LoomingPipeline **out);

/*
 Records the first frame. No report is produced.

 # Safety
 `pipeline` must be a live handle and `gray` must point to `len` bytes.
 */
enum LoomingStatus looming_pipeline_prime(struct LoomingPipeline *pipeline,
                                          const uint8_t *gray,
                                          size_t len);

/*
 Processes one frame and fills `report`. The frame's targets stay
 available through [`looming_pipeline_targets`] until the next step.

 # Safety
 `pipeline` must be a live handle, `gray` must point to `len` bytes and
 `report` must be writable.
 */
enum LoomingStatus looming_pipeline_step(struct LoomingPipeline *pipeline,
                                         const uint8_t *gray,
                                         size_t len,
                                         struct LoomingFrameReport *report);

/*
 Copies the latest frame's targets into `buf`. `written` receives the
 number of targets; when it exceeds `capacity` nothing is copied and
 `BufferTooSmall` is returned. `buf` may be null when `capacity` is 0.

 # Safety
 `pipeline` must be a live handle, `buf` must hold `capacity` entries and
 `written` must be writable.
 */
enum LoomingStatus looming_pipeline_targets(const struct LoomingPipeline *pipeline,
                                            struct LoomingTarget *buf,
                                            size_t capacity,
                                            size_t *written);

/*
 Number of frames consumed so far, 0 for a null handle.

 # Safety
 `pipeline` must be null or a live handle.
 */
uint64_t looming_pipeline_frame_index(const struct LoomingPipeline *pipeline);

/*
 Releases a handle. Null is ignored.

 # Safety
 `pipeline` must be null or a handle not yet freed.
 */
void looming_pipeline_free(struct LoomingPipeline *pipeline);

/*
 Message for the last failed call on this thread, or null. The pointer is
 valid until the next call into this library on the same thread.
 */
const char *looming_last_error(void);

/*
 Static name of a status code.
 */
const char *looming_status_name(enum LoomingStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOOMING_H */
