#ifndef NETNEG_H
#define NETNEG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NetNegStatus {
  NET_NEG_STATUS_OK = 0,
  NET_NEG_STATUS_NULL_POINTER = 1,
  NET_NEG_STATUS_INVALID_ARGUMENT = 2,
  NET_NEG_STATUS_PARSE = 3,
  NET_NEG_STATUS_IO = 4,
  NET_NEG_STATUS_CONTRACT = 5,
  NET_NEG_STATUS_PANIC = 6,
} NetNegStatus;

// The outcome of a composition run.
typedef struct NetNegComposition NetNegComposition;

// A duet under construction, with rule bookkeeping.
typedef struct NetNegDuet NetNegDuet;

// A trained or loaded sequential net.
typedef struct NetNegNet NetNegNet;

// Result of one negotiation round. `dead_end` is true when no legal
// pair exists; the pair fields are then unset.
typedef struct NetNegAgreement {
  bool dead_end;
  uint8_t voice1;
  uint8_t voice2;
  double utility;
  size_t legal_count;
} NetNegAgreement;

// Composition settings. Plans point at `plan_len` values each; they may be
// null when `agent_only` is set.
typedef struct NetNegComposeConfig {
  size_t length;
  const double *plan1;
  const double *plan2;
  size_t plan_len;
  double cm_weight;
  bool coin_toss;
  uint64_t seed;
  bool has_start;
  uint8_t start_voice1;
  uint8_t start_voice2;
  bool finalis;
  bool agent_only;
} NetNegComposeConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Short description of a status, e.g. `"parse error"`. Static; do not free.
const char *netneg_status_name(enum NetNegStatus status);

// Copy of the calling thread's last error message, or null if none.
char *netneg_last_error_message(void);

void netneg_string_free(char *s);

// Solfège name of gamut pitch `index` (0 = re .. 12 = si8), or null.
// Static; do not free.
const char *netneg_pitch_name(uint8_t index);

enum NetNegStatus netneg_pitch_parse(const char *name, uint8_t *out_index);

enum NetNegStatus netneg_duet_new(size_t length, bool finalis, struct NetNegDuet **out);

void netneg_duet_free(struct NetNegDuet *duet);

// Number of pairs placed so far.
size_t netneg_duet_position(const struct NetNegDuet *duet);

// Appends a pair without checking it against the rules.
enum NetNegStatus netneg_duet_push(struct NetNegDuet *duet, uint8_t voice1, uint8_t voice2);

// Rules the pair would break at the next position, as a bit mask: bit `r`
// is set when rule `r` fails. Zero means legal.
enum NetNegStatus netneg_duet_check_pair(const struct NetNegDuet *duet,
                                         uint8_t voice1,
                                         uint8_t voice2,
                                         uint16_t *out_mask);

// Negotiates the next pair. `act1`/`act2` point at 13 values each, or are
// null for zero activations.
enum NetNegStatus netneg_negotiate(const struct NetNegDuet *duet,
                                   const double *act1,
                                   const double *act2,
                                   double cm_weight,
                                   struct NetNegAgreement *out);

// Validates a duet in `V1:`/`V2:` text form. `out_report` may be null;
// otherwise it receives the per-position report, to be freed by the caller.
enum NetNegStatus netneg_validate_text(const char *text,
                                       bool finalis,
                                       bool *out_legal,
                                       char **out_report);

enum NetNegStatus netneg_net_load(const char *path, struct NetNegNet **out);

// Trains a fresh net on a corpus file with one-hot plans of `plan_size`
// units. `out_mse` may be null.
enum NetNegStatus netneg_net_train(const char *corpus_path,
                                   size_t plan_size,
                                   size_t hidden,
                                   size_t epochs,
                                   double learning_rate,
                                   double decay,
                                   uint64_t seed,
                                   struct NetNegNet **out,
                                   double *out_mse);

enum NetNegStatus netneg_net_save(const struct NetNegNet *net, const char *path);

void netneg_net_free(struct NetNegNet *net);

// Defaults: length 8, plans (0.8 0 0.8 0) and (0 1 0 1), weight 1,
// deterministic, start re8:re8, finalis on.
struct NetNegComposeConfig netneg_compose_default_config(void);

// Runs a composition. Nets may be null when `agent_only` is set. A dead end
// is a successful result; query it with `netneg_composition_dead_end`.
enum NetNegStatus netneg_compose(const struct NetNegNet *net_a,
                                 const struct NetNegNet *net_b,
                                 const struct NetNegComposeConfig *config,
                                 struct NetNegComposition **out);

void netneg_composition_free(struct NetNegComposition *composition);

// Number of pairs committed.
size_t netneg_composition_len(const struct NetNegComposition *composition);

enum NetNegStatus netneg_composition_pair(const struct NetNegComposition *composition,
                                          size_t index,
                                          uint8_t *out_voice1,
                                          uint8_t *out_voice2);

// True if the run stopped early; `out_step` (may be null) receives the step.
bool netneg_composition_dead_end(const struct NetNegComposition *composition, size_t *out_step);

// `V1:`/`V2:` text of the committed pairs. Free with `netneg_string_free`.
char *netneg_composition_text(const struct NetNegComposition *composition);

// The per-step trace as CSV. Free with `netneg_string_free`.
char *netneg_composition_trace_csv(const struct NetNegComposition *composition);

enum NetNegStatus netneg_composition_write_midi(const struct NetNegComposition *composition,
                                                const char *path,
                                                uint32_t tempo_bpm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETNEG_H */
