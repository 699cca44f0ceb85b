#ifndef QDART_H
#define QDART_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Status codes; the error values match the `qdart` CLI exit codes.
 */
typedef enum QdartStatus {
  QDART_STATUS_OK = 0,
  QDART_STATUS_CONFIG_ERROR = 2,
  QDART_STATUS_IO_ERROR = 3,
  QDART_STATUS_VALIDATION_ERROR = 4,
  QDART_STATUS_NULL_POINTER = 5,
  QDART_STATUS_PANIC = 6,
} QdartStatus;

/*
 Fitted corpus embedding.
 */
typedef struct QdartEmbedding QdartEmbedding;

/*
 Grayscale image.
 */
typedef struct QdartRaster QdartRaster;

/*
 Encoder weights.
 */
typedef struct QdartWeights QdartWeights;

/*
 Library version as a static NUL-terminated string.
 */
const char *qdart_version(void);

/*
 Message of the last failed call on this thread, or NULL. The pointer is
 valid until the next failing call on the same thread.
 */
const char *qdart_last_error_message(void);

/*
 Render `genes_len` genes (must be 14) to a `canvas` x `canvas` drawing.

 # Safety
 `genes` must point to `genes_len` readable doubles; `out` must be writable.
 */
enum QdartStatus qdart_render(const double *genes,
                              size_t genes_len,
                              size_t canvas,
                              uint64_t seed,
                              struct QdartRaster **out);

/*
 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum QdartStatus qdart_raster_read_png(const char *path, struct QdartRaster **out);

/*
 # Safety
 `raster` must be a live handle; `path` a NUL-terminated string.
 */
enum QdartStatus qdart_raster_write_png(const struct QdartRaster *raster, const char *path);

/*
 Width in pixels, 0 for NULL.

 # Safety
 `raster` must be NULL or a live handle.
 */
size_t qdart_raster_width(const struct QdartRaster *raster);

/*
 Height in pixels, 0 for NULL.

 # Safety
 `raster` must be NULL or a live handle.
 */
size_t qdart_raster_height(const struct QdartRaster *raster);

/*
 Row-major 8-bit pixels (0 = ink, 255 = white), width * height bytes,
 owned by the handle.

 # Safety
 `raster` must be NULL or a live handle.
 */
const uint8_t *qdart_raster_pixels(const struct QdartRaster *raster);

/*
 # Safety
 `raster` must be NULL or a handle not yet freed.
 */
void qdart_raster_free(struct QdartRaster *raster);

/*
 Structural-complexity fitness after resampling to `resolution`.

 # Safety
 `raster` must be a live handle; `out` must be writable.
 */
enum QdartStatus qdart_fitness(const struct QdartRaster *raster, size_t resolution, double *out);

/*
 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum QdartStatus qdart_weights_load(const char *path, struct QdartWeights **out);

/*
 Fixed random weights drawn from `seed`.

 # Safety
 `out` must be writable.
 */
enum QdartStatus qdart_weights_stub(uint64_t seed, struct QdartWeights **out);

/*
 # Safety
 `weights` must be a live handle; `path` a NUL-terminated string.
 */
enum QdartStatus qdart_weights_save(const struct QdartWeights *weights, const char *path);

/*
 # Safety
 `weights` must be NULL or a handle not yet freed.
 */
void qdart_weights_free(struct QdartWeights *weights);

/*
 Latent vector length written by [`qdart_encode`].
 */
size_t qdart_latent_dim(void);

/*
 Encode a drawing (downsampled to 64x64) into `out`, which must hold
 `out_len == qdart_latent_dim()` floats.

 # Safety
 Handles must be live; `out` must point to `out_len` writable floats.
 */
enum QdartStatus qdart_encode(const struct QdartWeights *weights,
                              const struct QdartRaster *raster,
                              float *out,
                              size_t out_len);

/*
 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum QdartStatus qdart_embedding_load(const char *path, struct QdartEmbedding **out);

/*
 Corpus size, 0 for NULL.

 # Safety
 `embedding` must be NULL or a live handle.
 */
size_t qdart_embedding_len(const struct QdartEmbedding *embedding);

/*
 # Safety
 `embedding` must be NULL or a handle not yet freed.
 */
void qdart_embedding_free(struct QdartEmbedding *embedding);

/*
 Place a drawing on the unit-square map by interpolating its
 `neighbours` nearest corpus entries; writes x, y to `out_pos[0..2]`.

 # Safety
 Handles must be live; `out_pos` must point to 2 writable doubles.
 */
enum QdartStatus qdart_embed(const struct QdartWeights *weights,
                             const struct QdartEmbedding *embedding,
                             const struct QdartRaster *raster,
                             size_t neighbours,
                             double *out_pos);

/*
 Load a configuration file and execute the run into `out_dir`.

 # Safety
 Both arguments must be NUL-terminated strings.
 */
enum QdartStatus qdart_run_config(const char *config_path, const char *out_dir);

#endif  /* QDART_H */
