/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef GSMCRYPT_H
#define GSMCRYPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Samples per codec frame.
#define GSMCRYPT_FRAME_SAMPLES 160

// Bytes per packed codec frame.
#define GSMCRYPT_FRAME_BYTES 33

#define GSMCRYPT_KEY_BYTES 8

typedef enum GsmcryptInversion {
  GSMCRYPT_INVERSION_TIME = 0,
  GSMCRYPT_INVERSION_SIGN = 1,
} GsmcryptInversion;

typedef enum GsmcryptStatus {
  GSMCRYPT_STATUS_OK = 0,
  // A required pointer was null.
  GSMCRYPT_STATUS_NULL_POINTER = 1,
  // A numeric argument was out of range (e.g. sub-frame length).
  GSMCRYPT_STATUS_INVALID_ARGUMENT = 2,
  // Input bytes are not a well-formed stream or frame.
  GSMCRYPT_STATUS_BAD_FORMAT = 3,
  // Wrong key or tampered stream.
  GSMCRYPT_STATUS_DECRYPTION_FAILED = 4,
  // Internal error; the library caught a panic.
  GSMCRYPT_STATUS_PANIC = 5,
} GsmcryptStatus;

// Stateful codec decoder.
typedef struct GsmcryptDecoder GsmcryptDecoder;

// Stateful codec encoder.
typedef struct GsmcryptEncoder GsmcryptEncoder;

// Key plus scrambler configuration.
typedef struct GsmcryptSession GsmcryptSession;

// Library-allocated bytes.
typedef struct GsmcryptBuffer {
  uint8_t *data;
  size_t len;
} GsmcryptBuffer;

// Library-allocated 16-bit samples.
typedef struct GsmcryptSamples {
  int16_t *data;
  size_t len;
} GsmcryptSamples;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static, NUL-terminated description of a status code.
const char *gsmcrypt_status_message(enum GsmcryptStatus status);

const char *gsmcrypt_version(void);

// Creates a session from an 8-byte key. `sub_frame_len` must be a
// positive multiple of 160, `frames_per_super` in 1..=256.
enum GsmcryptStatus gsmcrypt_session_new(const uint8_t *key,
                                         uint32_t sub_frame_len,
                                         uint32_t frames_per_super,
                                         enum GsmcryptInversion inversion,
                                         struct GsmcryptSession **out);

void gsmcrypt_session_free(struct GsmcryptSession *session);

// Scrambles, encodes and encrypts `len` samples into a secure stream.
enum GsmcryptStatus gsmcrypt_encrypt(const struct GsmcryptSession *session,
                                     const int16_t *samples,
                                     size_t len,
                                     struct GsmcryptBuffer *out);

// Recovers the original samples from a secure stream.
enum GsmcryptStatus gsmcrypt_decrypt(const struct GsmcryptSession *session,
                                     const uint8_t *bytes,
                                     size_t len,
                                     struct GsmcryptSamples *out);

// Decodes a secure stream without descrambling (no key needed).
enum GsmcryptStatus gsmcrypt_eavesdrop(const uint8_t *bytes,
                                       size_t len,
                                       struct GsmcryptSamples *out);

void gsmcrypt_buffer_free(struct GsmcryptBuffer buffer);

void gsmcrypt_samples_free(struct GsmcryptSamples samples);

enum GsmcryptStatus gsmcrypt_encoder_new(struct GsmcryptEncoder **out);

void gsmcrypt_encoder_free(struct GsmcryptEncoder *encoder);

// Encodes 160 samples into one 33-byte frame.
enum GsmcryptStatus gsmcrypt_encode_frame(struct GsmcryptEncoder *encoder,
                                          const int16_t *samples,
                                          uint8_t *frame_out);

enum GsmcryptStatus gsmcrypt_decoder_new(struct GsmcryptDecoder **out);

void gsmcrypt_decoder_free(struct GsmcryptDecoder *decoder);

// Decodes one 33-byte frame into 160 samples. A frame without the 0xd
// signature nibble is rejected with `BadFormat` and leaves the decoder
// state untouched.
enum GsmcryptStatus gsmcrypt_decode_frame(struct GsmcryptDecoder *decoder,
                                          const uint8_t *frame,
                                          int16_t *samples_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSMCRYPT_H */
