#ifndef AUTOSTRUCT_H
#define AUTOSTRUCT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  AS_STATUS_OK = 0,
  AS_STATUS_NULL_ARGUMENT = 1,
  AS_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON, formula or regex text.
   */
  AS_STATUS_PARSE = 3,
  /**
   * The library rejected the input or the operation failed.
   */
  AS_STATUS_FAILED = 4,
  AS_STATUS_PANIC = 5,
} as_status;

/**
 * A finite automaton.
 */
typedef struct as_automaton as_automaton;

/**
 * An automatic presentation.
 */
typedef struct as_presentation as_presentation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Owned by the library.
 */
const char *as_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void as_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *as_version(void);

/**
 * Builds a DFA from a regex over an alphabet given as a JSON array of tokens.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to free with [`as_automaton_free`].
 */
as_status as_automaton_from_regex(const char *alphabet_json, const char *regex, as_automaton **out);

/**
 * # Safety
 * Pointers must be valid; `out` receives a handle to free with [`as_automaton_free`].
 */
as_status as_automaton_from_json(const char *json, as_automaton **out);

/**
 * # Safety
 * `a` must be null or a live handle.
 */
void as_automaton_free(as_automaton *a);

/**
 * # Safety
 * Pointers must be valid.
 */
as_status as_automaton_to_json(const as_automaton *a, char **out);

/**
 * Membership of a word written in the alphabet's text form.
 *
 * # Safety
 * Pointers must be valid.
 */
as_status as_automaton_accepts(const as_automaton *a, const char *word, bool *out);

/**
 * Cumulative word counts for lengths 0..=n as a JSON array of decimal strings.
 *
 * # Safety
 * Pointers must be valid.
 */
as_status as_automaton_count(const as_automaton *a, size_t n, char **out);

/**
 * Growth classification as JSON: polynomial, degree and a bounded decomposition.
 *
 * # Safety
 * Pointers must be valid.
 */
as_status as_automaton_growth(const as_automaton *a, char **out);

/**
 * One of the built-in presentations: omega, presburger, divp, tree, grid, triangular.
 * `param` is the base where one is needed and ignored otherwise.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to free with [`as_presentation_free`].
 */
as_status as_presentation_builtin(const char *name, size_t param, as_presentation **out);

/**
 * # Safety
 * Pointers must be valid; `out` receives a handle to free with [`as_presentation_free`].
 */
as_status as_presentation_from_json(const char *json, as_presentation **out);

/**
 * # Safety
 * `p` must be null or a live handle.
 */
void as_presentation_free(as_presentation *p);

/**
 * # Safety
 * Pointers must be valid.
 */
as_status as_presentation_to_json(const as_presentation *p, char **out);

/**
 * Truth of a sentence.
 *
 * # Safety
 * Pointers must be valid.
 */
as_status as_presentation_decide(const as_presentation *p, const char *sentence, bool *out);

/**
 * The relation defined by a formula, as JSON `{"vars", "relation"}`.
 *
 * # Safety
 * Pointers must be valid.
 */
as_status as_presentation_eval(const as_presentation *p, const char *formula, char **out);

/**
 * Classifies the kernel of an order-definable function given as fiber-spec JSON
 * `{"m", "n", "graph"}` and writes the descriptor JSON.
 *
 * # Safety
 * Pointers must be valid.
 */
as_status as_eq_classify(const char *fiber_json, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* AUTOSTRUCT_H */
