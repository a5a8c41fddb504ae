#pragma once

#include <stdexcept>
#include <string>

namespace greenmetrics {

// Every failure the library reports, as a closed set so callers can map
// outcomes to process exit codes without string matching.
enum class errc {
  file_unreadable,
  schema_violation,
  invariant_violation,
  not_found,
  usage_out_of_range,
  negative_runtime,
  empty_facility_list,
  non_positive_distance,
  bad_header,
  non_monotone_timestamps,
  value_out_of_range,
  trace_too_short,
  dimension_mismatch,
  empty_sequence,
  non_finite_vector,
  empty_corpus,
  missing_embeddings,
  label_mismatch,
};

inline const char* errc_name(errc kind) noexcept {
  switch (kind) {
    case errc::file_unreadable: return "file_unreadable";
    case errc::schema_violation: return "schema_violation";
    case errc::invariant_violation: return "invariant_violation";
    case errc::not_found: return "not_found";
    case errc::usage_out_of_range: return "usage_out_of_range";
    case errc::negative_runtime: return "negative_runtime";
    case errc::empty_facility_list: return "empty_facility_list";
    case errc::non_positive_distance: return "non_positive_distance";
    case errc::bad_header: return "bad_header";
    case errc::non_monotone_timestamps: return "non_monotone_timestamps";
    case errc::value_out_of_range: return "value_out_of_range";
    case errc::trace_too_short: return "trace_too_short";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::empty_sequence: return "empty_sequence";
    case errc::non_finite_vector: return "non_finite_vector";
    case errc::empty_corpus: return "empty_corpus";
    case errc::missing_embeddings: return "missing_embeddings";
    case errc::label_mismatch: return "label_mismatch";
  }
  return "unknown";
}

// CLI exit class: 2 for input files that do not parse (structure/format),
// 3 for inputs that parse but violate a domain invariant or range.
inline int exit_class(errc kind) noexcept {
  switch (kind) {
    case errc::file_unreadable:
    case errc::schema_violation:
    case errc::bad_header:
    case errc::non_monotone_timestamps:
      return 2;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(errc kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void raise(errc kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace greenmetrics
