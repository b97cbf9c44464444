#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hermhecke/eigen.hpp"
#include "hermhecke/field.hpp"
#include "hermhecke/fourier.hpp"
#include "hermhecke/hecke.hpp"
#include "hermhecke/ideal.hpp"
#include "hermhecke/matrix.hpp"

namespace hermhecke::json_io {

using Json = nlohmann::ordered_json;

/// Structurally invalid JSON input (missing keys, wrong types, bad numbers).
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Field elements: [a, b] for a + b·ω, {"num": [a, b], "den": d} otherwise.
// Integers beyond 64 bits are written as decimal strings.
Json to_json(const KElem& x);
KElem kelem_from_json(const QuadField& field, const Json& j);

/// "p/q" in lowest terms ("p" when integral).
Json to_json(const Rational& r);
Rational rational_from_json(const Json& j);

/// {"n", "q", "entries"}; n is half the size, q the similitude factor
/// (0 when M is not a similitude).
Json matrix_to_json(const MatK& M);
MatK matrix_from_json(const QuadField& field, const Json& j);

Json to_json(const DoubleCosetKey& key);
DoubleCosetKey key_from_json(const QuadField& field, const Json& j);

/// {"m", "n", "key", "q", "reps"}
Json to_json(const RightCosetSet& s, const QuadField& field);
RightCosetSet coset_set_from_json(const Json& j);
QuadField field_of(const Json& j);

/// {"m", "n", "terms": [{"key", "c"}]}
Json to_json(const HeckeElement& e);
HeckeElement hecke_from_json(const Json& j);

/// {"m", "n", "k", "scale", "trunc", "coeffs": [{"T": {"diag", "upper"}, "c"}]}
/// with "upper" holding the numerators μ_ij = t_ij·√d_K.
Json to_json(const FourierExpansion& f);
FourierExpansion expansion_from_json(const Json& j);

/// {"m", "h", "forms", "reps", "N"}
Json to_json(const QuadField& field, const ClassRepSet& reps);
ClassRepSet classgroup_from_json(const Json& j);

/// {"hypotheses": [{"name", "status", "witness"}], "lambda", "certified_bound", "conclusion"}
Json to_json(const EisensteinCertificate& c);
EisensteinCertificate certificate_from_json(const Json& j);

/// Reads and parses a file; FormatError on malformed content.
Json read_file(const std::string& path);
/// Writes via a temporary file in the same directory and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace hermhecke::json_io
