#include "hermhecke/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hermhecke/errors.hpp"

namespace hermhecke::json_io {

namespace {

Json int_json(const Integer& x) {
  if (x.fits_slong_p()) return Json(x.get_si());
  return Json(x.get_str());
}

Integer int_from(const Json& j) {
  if (j.is_number_integer()) return Integer(j.get<long>());
  if (j.is_string()) {
    Integer x;
    if (x.set_str(j.get<std::string>(), 10) != 0) throw FormatError("not an integer: " + j.dump());
    return x;
  }
  throw FormatError("expected an integer, got " + j.dump());
}

std::int64_t small_int(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw FormatError(std::string(what) + " must be an integer");
  return j.get<std::int64_t>();
}

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

const Json& array_member(const Json& j, const char* key) {
  const Json& a = member(j, key);
  if (!a.is_array()) throw FormatError(std::string("\"") + key + "\" must be an array");
  return a;
}

QuadField field_from_m(const Json& j) {
  try {
    return QuadField::make(small_int(member(j, "m"), "m"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

// Diagonal entries: integers as numbers, other rationals as strings.
Json diag_json(const Rational& r) {
  if (r.get_den() == 1) return int_json(r.get_num());
  return to_json(r);
}

}  // namespace

Json to_json(const KElem& x) {
  Json num = Json::array({int_json(x.a()), int_json(x.b())});
  if (x.den() == 1) return num;
  return Json{{"num", num}, {"den", int_json(x.den())}};
}

KElem kelem_from_json(const QuadField& field, const Json& j) {
  const Json* num = &j;
  Integer den = 1;
  if (j.is_object()) {
    num = &member(j, "num");
    den = int_from(member(j, "den"));
    if (den <= 0) throw FormatError("element denominator must be positive");
  }
  if (!num->is_array() || num->size() != 2) throw FormatError("field element must be [a, b]");
  return KElem(field.m(), int_from((*num)[0]), int_from((*num)[1]), den);
}

Json to_json(const Rational& r) { return rational_to_string(r); }

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(Integer(j.get<long>()));
  if (!j.is_string()) throw FormatError("rational must be a \"p/q\" string");
  try {
    return rational_from_string(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

Json matrix_to_json(const MatK& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(to_json(M(i, j)));
    rows.push_back(row);
  }
  Integer q = 0;
  if (M.is_square() && M.rows() % 2 == 0 && M.is_integral())
    if (auto s = similitude_factor(M)) q = *s;
  return Json{{"n", M.rows() / 2}, {"q", int_json(q)}, {"entries", rows}};
}

MatK matrix_from_json(const QuadField& field, const Json& j) {
  const Json& rows = array_member(j, "entries");
  const int r = static_cast<int>(rows.size());
  const int c = r ? static_cast<int>(rows[0].size()) : 0;
  if (j.contains("n") && small_int(j.at("n"), "n") * 2 != r) throw FormatError("matrix size does not match n");
  MatK M(field, r, c);
  for (int i = 0; i < r; ++i) {
    if (!rows[static_cast<std::size_t>(i)].is_array() || static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c)
      throw FormatError("matrix rows must have equal length");
    for (int k = 0; k < c; ++k) M(i, k) = kelem_from_json(field, rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
  }
  return M;
}

Json to_json(const DoubleCosetKey& key) {
  Json a = Json::array();
  for (auto d : key.divisors()) a.push_back(d);
  return a;
}

DoubleCosetKey key_from_json(const QuadField& field, const Json& j) {
  if (!j.is_array()) throw FormatError("key must be an array of divisors");
  std::vector<std::int64_t> d;
  for (const auto& x : j) d.push_back(small_int(x, "key entry"));
  try {
    return DoubleCosetKey::make(field, d);
  } catch (const ScopeError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

QuadField field_of(const Json& j) { return field_from_m(j); }

Json to_json(const RightCosetSet& s, const QuadField& field) {
  Json reps = Json::array();
  for (const MatK& M : s.reps) reps.push_back(matrix_to_json(M));
  return Json{{"m", field.m()}, {"n", s.key.n()}, {"key", to_json(s.key)}, {"q", s.key.q()}, {"reps", reps}};
}

RightCosetSet coset_set_from_json(const Json& j) {
  const QuadField field = field_from_m(j);
  RightCosetSet s{key_from_json(field, member(j, "key")), {}};
  if (small_int(member(j, "q"), "q") != s.key.q()) throw FormatError("q does not match the key");
  for (const auto& r : array_member(j, "reps")) s.reps.push_back(matrix_from_json(field, r));
  return s;
}

Json to_json(const HeckeElement& e) {
  Json terms = Json::array();
  for (const auto& [key, c] : e.terms) terms.push_back(Json{{"key", to_json(key)}, {"c", to_json(c)}});
  return Json{{"m", e.field.m()}, {"n", e.n}, {"terms", terms}};
}

HeckeElement hecke_from_json(const Json& j) {
  const QuadField field = field_from_m(j);
  HeckeElement e{field, static_cast<int>(small_int(member(j, "n"), "n")), {}};
  for (const auto& t : array_member(j, "terms")) {
    DoubleCosetKey key = key_from_json(field, member(t, "key"));
    if (key.n() != e.n) throw FormatError("term degree does not match n");
    e.terms[key] += rational_from_json(member(t, "c"));
  }
  e.prune();
  return e;
}

Json to_json(const FourierExpansion& f) {
  Json coeffs = Json::array();
  for (const auto& [T, c] : f.coeffs) {
    Json diag = Json::array();
    for (const auto& d : T.diag) diag.push_back(diag_json(d));
    Json upper = Json::array();
    for (int i = 0; i < T.n(); ++i)
      for (int k = i + 1; k < T.n(); ++k) upper.push_back(to_json(T.mu(f.field, i, k)));
    coeffs.push_back(Json{{"T", Json{{"diag", diag}, {"upper", upper}}}, {"c", to_json(c)}});
  }
  return Json{{"m", f.field.m()}, {"n", f.n},         {"k", f.k},
              {"scale", f.scale}, {"trunc", diag_json(f.trunc)}, {"coeffs", coeffs}};
}

FourierExpansion expansion_from_json(const Json& j) {
  FourierExpansion f{field_from_m(j), 1, 0, 1, 0, {}};
  f.n = static_cast<int>(small_int(member(j, "n"), "n"));
  f.k = static_cast<int>(small_int(member(j, "k"), "k"));
  f.scale = small_int(member(j, "scale"), "scale");
  if (f.n < 0 || f.scale < 1) throw FormatError("n must be >= 0 and scale >= 1");
  f.trunc = rational_from_json(member(j, "trunc"));
  const KElem root = f.field.sqrt_disc();
  for (const auto& e : array_member(j, "coeffs")) {
    const Json& T = member(e, "T");
    HermIndex idx;
    for (const auto& d : array_member(T, "diag")) idx.diag.push_back(rational_from_json(d));
    for (const auto& u : array_member(T, "upper")) idx.upper.push_back(kelem_from_json(f.field, u) / root);
    if (idx.n() != f.n || static_cast<int>(idx.upper.size()) != f.n * (f.n - 1) / 2)
      throw FormatError("index size does not match n");
    f.coeffs[idx] = rational_from_json(member(e, "c"));
  }
  f.prune();
  return f;
}

Json to_json(const QuadField& field, const ClassRepSet& reps) {
  Json forms = Json::array(), rs = Json::array();
  for (const auto& r : reps.reps) {
    Json form = Json::array({int_json(r.form.alpha), int_json(r.form.beta), int_json(r.form.gamma)});
    forms.push_back(form);
    rs.push_back(Json{{"u", to_json(r.u)}, {"form", form}, {"inverted", r.inverted}, {"N_j", int_json(r.n_j)}});
  }
  Json j{{"m", field.m()}, {"h", reps.reps.size()}, {"forms", forms}, {"reps", rs}, {"N", int_json(reps.N)}};
  if (reps.avoided_prime) j["avoid_p"] = *reps.avoided_prime;
  return j;
}

ClassRepSet classgroup_from_json(const Json& j) {
  const QuadField field = field_from_m(j);
  ClassRepSet s;
  s.N = int_from(member(j, "N"));
  if (j.contains("avoid_p")) s.avoided_prime = small_int(j.at("avoid_p"), "avoid_p");
  for (const auto& r : array_member(j, "reps")) {
    const Json& f = member(r, "form");
    if (!f.is_array() || f.size() != 3) throw FormatError("form must be [alpha, beta, gamma]");
    const Json& inv = member(r, "inverted");
    if (!inv.is_boolean()) throw FormatError("\"inverted\" must be a boolean");
    s.reps.push_back(ClassRep{kelem_from_json(field, member(r, "u")), QuadForm{int_from(f[0]), int_from(f[1]), int_from(f[2])},
                              inv.get<bool>(), int_from(member(r, "N_j"))});
  }
  if (small_int(member(j, "h"), "h") != static_cast<std::int64_t>(s.reps.size()))
    throw FormatError("h does not match the number of representatives");
  return s;
}

Json to_json(const EisensteinCertificate& c) {
  Json hs = Json::array();
  for (const auto& h : c.hypotheses)
    hs.push_back(Json{{"name", h.name}, {"status", to_string(h.status)}, {"witness", h.witness}});
  Json j{{"hypotheses", hs}};
  j["lambda"] = c.lambda ? to_json(*c.lambda) : Json(nullptr);
  j["certified_bound"] = diag_json(c.certified_bound);
  j["conclusion"] = c.conclusion;
  return j;
}

EisensteinCertificate certificate_from_json(const Json& j) {
  EisensteinCertificate c;
  for (const auto& h : array_member(j, "hypotheses")) {
    const std::string st = member(h, "status").get<std::string>();
    CheckStatus s;
    if (st == "pass")
      s = CheckStatus::pass;
    else if (st == "fail")
      s = CheckStatus::fail;
    else if (st == "skipped")
      s = CheckStatus::skipped;
    else
      throw FormatError("unknown hypothesis status " + st);
    c.hypotheses.push_back({member(h, "name").get<std::string>(), s, member(h, "witness").get<std::string>()});
  }
  if (j.contains("lambda") && !j.at("lambda").is_null()) c.lambda = rational_from_json(j.at("lambda"));
  if (j.contains("certified_bound")) c.certified_bound = rational_from_json(j.at("certified_bound"));
  const Json& concl = member(j, "conclusion");
  if (!concl.is_boolean()) throw FormatError("\"conclusion\" must be a boolean");
  c.conclusion = concl.get<bool>();
  return c;
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace hermhecke::json_io
