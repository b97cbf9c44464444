// Command-line front end: every subcommand builds one JSON artifact, prints
// it (--json) or a short summary, and optionally writes it atomically.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hermhecke/eigen.hpp"
#include "hermhecke/errors.hpp"
#include "hermhecke/field.hpp"
#include "hermhecke/fourier.hpp"
#include "hermhecke/hecke.hpp"
#include "hermhecke/ideal.hpp"
#include "hermhecke/json_io.hpp"

namespace hh = hermhecke;
namespace jio = hermhecke::json_io;
using jio::Json;

namespace {

struct Global {
  bool json = false;
  std::uint64_t seed = 1;
  std::uint64_t cap = 1'000'000;
  unsigned threads = 1;
  std::string out;
};

struct Result {
  Json artifact;
  std::string summary;
};

/// Usage problems found after CLI11 parsing (bad --key syntax etc.).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

hh::EnumerationOptions enum_opts(const Global& g) {
  hh::EnumerationOptions o;
  o.cap = g.cap;
  o.threads = g.threads;
  return o;
}

std::vector<std::int64_t> parse_key(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("malformed --key entry '" + tok + "'");
    }
  }
  return out;
}

/// A Hecke element from either a coset-set file or a Hecke-element file.
hh::HeckeElement element_from_file(const std::string& path) {
  Json j = jio::read_file(path);
  if (j.contains("terms")) return jio::hecke_from_json(j);
  hh::RightCosetSet s = jio::coset_set_from_json(j);
  return hh::HeckeElement::single(jio::field_of(j), s.key);
}

void require_same_field(const hh::QuadField& a, std::int64_t m) {
  if (a.m() != m) throw std::invalid_argument("inputs belong to different fields (m = " + std::to_string(a.m()) + " and m = " + std::to_string(m) + ")");
}

int emit_error(const std::string& code, const std::string& msg, int status) {
  Json e{{"error", code}, {"message", msg}, {"exit", status}};
  std::cerr << e.dump() << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hecke operators for Hermitian modular forms over imaginary-quadratic fields"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file (seed, cap, threads)");

  Global g;
  app.add_flag("--json", g.json, "Print the JSON artifact instead of a summary");
  app.add_option("--seed", g.seed, "Seed recorded in every artifact");
  app.add_option("--cap", g.cap, "Cap on enumeration candidates per level")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Enumeration worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--out", g.out, "Write the artifact to this file");

  std::function<Result()> run;

  // field
  std::int64_t m = 1;
  auto* field_cmd = app.add_subcommand("field", "Discriminant, integral basis and class number");
  field_cmd->add_option("--m", m, "Squarefree m for K = Q(sqrt(-m))")->required()->check(CLI::PositiveNumber);
  std::vector<std::int64_t> classify;
  field_cmd->add_option("--classify", classify, "Primes to classify")->delimiter(',');
  field_cmd->callback([&] {
    run = [&] {
      auto K = hh::QuadField::make(m);
      Json j{{"m", m},
             {"d_K", K.disc()},
             {"omega", K.omega_kind() == hh::OmegaKind::half_integral ? "(1+sqrt(-m))/2" : "sqrt(-m)"},
             {"h", hh::class_number(K)}};
      Json primes = Json::object();
      for (auto p : classify) primes[std::to_string(p)] = hh::to_string(hh::classify_prime(K, p));
      if (!classify.empty()) j["primes"] = primes;
      std::ostringstream s;
      s << "K = Q(sqrt(-" << m << ")), d_K = " << K.disc() << ", h = " << j["h"].get<int>();
      for (auto& [p, t] : primes.items()) s << "\n  " << p << ": " << t.get<std::string>();
      return Result{j, s.str()};
    };
  });

  // classgroup
  std::optional<std::int64_t> avoid_p;
  auto* cg = app.add_subcommand("classgroup", "Reduced forms, class representatives u_j and N");
  cg->add_option("--m", m)->required()->check(CLI::PositiveNumber);
  cg->add_option("--avoid-p", avoid_p, "Odd prime divisor of d_K that N must avoid");
  cg->callback([&] {
    run = [&] {
      auto K = hh::QuadField::make(m);
      auto reps = hh::class_representatives(K, avoid_p);
      std::ostringstream s;
      s << "h = " << reps.reps.size() << ", N = " << reps.N.get_str();
      for (const auto& r : reps.reps)
        s << "\n  (" << r.form.alpha.get_str() << "," << r.form.beta.get_str() << "," << r.form.gamma.get_str()
          << ")  u = " << r.u.str();
      return Result{jio::to_json(K, reps), s.str()};
    };
  });

  // find-prime
  std::int64_t modulus = 1, bound = 100000, min_p = 2;
  auto* fp = app.add_subcommand("find-prime", "Smallest inert prime p = 1 mod modulus");
  fp->add_option("--m", m)->required()->check(CLI::PositiveNumber);
  fp->add_option("--modulus", modulus)->check(CLI::PositiveNumber);
  fp->add_option("--bound", bound, "Search bound")->check(CLI::PositiveNumber);
  fp->add_option("--min-p", min_p, "Smallest candidate")->check(CLI::PositiveNumber);
  fp->callback([&] {
    run = [&] {
      auto K = hh::QuadField::make(m);
      auto hyp = hh::inert_prime_hypotheses(K, modulus);
      const auto p = hh::find_inert_prime(K, modulus, bound, min_p);
      Json j{{"m", m}, {"modulus", modulus}, {"bound", bound}, {"p", p},
             {"hypotheses", Json{{"holds", hyp.holds}, {"detail", hyp.detail}}}};
      return Result{j, "p = " + std::to_string(p)};
    };
  });

  // hecke
  auto* hecke = app.add_subcommand("hecke", "Double cosets in the inert Hecke algebra");
  hecke->require_subcommand(1);
  int n = 1;
  std::string key_str;
  auto* cosets = hecke->add_subcommand("cosets", "Enumerate right cosets of a double coset");
  cosets->add_option("--m", m)->required()->check(CLI::PositiveNumber);
  cosets->add_option("--n", n)->required()->check(CLI::Range(1, 3));
  cosets->add_option("--key", key_str, "a1,..,an,d1,..,dn")->required();
  cosets->callback([&] {
    run = [&] {
      auto K = hh::QuadField::make(m);
      auto div = parse_key(key_str);
      if (static_cast<int>(div.size()) != 2 * n) throw UsageError("--key needs 2n divisors");
      auto key = hh::DoubleCosetKey::make(K, div);
      hh::HeckeEngine engine(K, n, enum_opts(g));
      const auto& set = engine.right_cosets(key);
      return Result{jio::to_json(set, K), key.str() + ": " + std::to_string(set.reps.size()) + " right cosets"};
    };
  });

  std::string lhs, rhs, in_file;
  auto* product = hecke->add_subcommand("product", "Product of two Hecke elements");
  product->add_option("--lhs", lhs)->required()->check(CLI::ExistingFile);
  product->add_option("--rhs", rhs)->required()->check(CLI::ExistingFile);
  product->callback([&] {
    run = [&] {
      auto x = element_from_file(lhs);
      auto y = element_from_file(rhs);
      require_same_field(x.field, y.field.m());
      if (x.n != y.n) throw std::invalid_argument("factors have different degrees");
      hh::HeckeEngine engine(x.field, x.n, enum_opts(g));
      auto z = engine.product(x, y);
      return Result{jio::to_json(z), z.str()};
    };
  });

  int k = 0;
  std::optional<int> k_opt;
  auto* hphi = hecke->add_subcommand("phi", "The map phi_k to degree n-1");
  hphi->add_option("--k", k, "Weight")->required();
  hphi->add_option("--in", in_file)->required()->check(CLI::ExistingFile);
  hphi->callback([&] {
    run = [&] {
      auto e = element_from_file(in_file);
      if (e.n < 2) throw std::invalid_argument("phi needs degree n >= 2");
      hh::HeckeEngine engine(e.field, e.n, enum_opts(g));
      hh::HeckeElement image{e.field, e.n - 1, {}};
      Json weights = Json::array();
      for (const auto& [key, c] : e.terms) {
        auto r = engine.phi(key, k);
        image = image + r.image.scaled(c);
        weights.push_back(Json{{"key", jio::to_json(key)}, {"total_weight", jio::to_json(r.total_weight)}});
      }
      image.prune();
      Json j{{"k", k}, {"image", jio::to_json(image)}, {"weights", weights}};
      if (image.terms.size() == 1) j["scalar"] = jio::to_json(image.terms.begin()->second);
      return Result{j, image.str()};
    };
  });

  // forms
  auto* forms = app.add_subcommand("forms", "Formal Fourier expansions");
  forms->require_subcommand(1);
  int terms = 30;
  auto* eis = forms->add_subcommand("eisenstein", "Degree-one Eisenstein q-expansion");
  eis->add_option("--m", m, "Field (default 1)")->check(CLI::PositiveNumber);
  eis->add_option("--k", k)->required();
  eis->add_option("--terms", terms)->check(CLI::PositiveNumber);
  eis->callback([&] {
    run = [&] {
      auto f = hh::eisenstein_q_expansion(hh::QuadField::make(m), k, terms);
      return Result{jio::to_json(f), "E_" + std::to_string(k) + ": " + std::to_string(f.coeffs.size()) + " coefficients"};
    };
  });

  std::string form_file, coset_file;
  auto* act = forms->add_subcommand("act", "Apply a coset set or Hecke element");
  act->add_option("--form", form_file)->required()->check(CLI::ExistingFile);
  act->add_option("--coset", coset_file, "Coset-set or Hecke-element file")->required()->check(CLI::ExistingFile);
  act->add_option("--k", k_opt, "Weight (default: the form's)");
  act->callback([&] {
    run = [&] {
      auto f = jio::expansion_from_json(jio::read_file(form_file));
      const int w = k_opt.value_or(f.k);
      Json cj = jio::read_file(coset_file);
      require_same_field(f.field, jio::field_of(cj).m());
      hh::FourierExpansion g2 = [&] {
        if (cj.contains("terms")) {
          auto e = jio::hecke_from_json(cj);
          if (e.n != f.n) throw std::invalid_argument("Hecke element and form have different degrees");
          hh::HeckeEngine engine(f.field, f.n, enum_opts(g));
          return hh::hecke_act(f, e, w, engine);
        }
        auto s = jio::coset_set_from_json(cj);
        if (s.key.n() != f.n) throw std::invalid_argument("cosets and form have different degrees");
        return hh::hecke_act(f, s, w);
      }();
      return Result{jio::to_json(g2), std::to_string(g2.coeffs.size()) + " coefficients, certified trace <= " +
                                          hh::rational_to_string(g2.trunc)};
    };
  });

  auto* fphi = forms->add_subcommand("phi", "Siegel Phi operator");
  fphi->add_option("--form", form_file)->required()->check(CLI::ExistingFile);
  fphi->callback([&] {
    run = [&] {
      auto f = hh::siegel_phi(jio::expansion_from_json(jio::read_file(form_file)));
      return Result{jio::to_json(f), "degree " + std::to_string(f.n) + ", " + std::to_string(f.coeffs.size()) + " coefficients"};
    };
  });

  std::optional<std::int64_t> m_opt;
  auto* cusp = forms->add_subcommand("cusp-test", "Direct and twisted-Phi cusp tests");
  cusp->add_option("--form", form_file)->required()->check(CLI::ExistingFile);
  cusp->add_option("--m", m_opt, "Field; must match the form");
  cusp->callback([&] {
    run = [&] {
      auto f = jio::expansion_from_json(jio::read_file(form_file));
      if (m_opt) require_same_field(f.field, *m_opt);
      auto reps = hh::class_representatives(f.field);
      auto r = hh::cusp_tests(f, reps);
      Json per = Json::array();
      for (bool b : r.per_class) per.push_back(b);
      Json j{{"m", f.field.m()}, {"direct", r.direct}, {"twisted", r.twisted}, {"agree", r.agree}, {"per_class", per}};
      return Result{j, std::string("cusp form: ") + (r.direct ? "yes" : "no") + (r.agree ? "" : " (tests disagree)")};
    };
  });

  // eigen
  std::int64_t p = 0;
  auto* eigen = app.add_subcommand("eigen", "Check f | T = lambda f on the certified range");
  eigen->add_option("--form", form_file)->required()->check(CLI::ExistingFile);
  auto* p_opt = eigen->add_option("--p", p, "Use T_n(p)");
  auto* key_opt = eigen->add_option("--key", key_str, "Use the double coset a1,..,dn");
  p_opt->excludes(key_opt);
  eigen->add_option("--k", k_opt);
  eigen->callback([&] {
    if (p_opt->count() == 0 && key_opt->count() == 0) throw CLI::RequiredError("--p or --key");
    run = [&] {
      auto f = jio::expansion_from_json(jio::read_file(form_file));
      const int w = k_opt.value_or(f.k);
      auto key = p ? hh::t_key(f.field, f.n, p) : hh::DoubleCosetKey::make(f.field, parse_key(key_str));
      hh::HeckeEngine engine(f.field, f.n, enum_opts(g));
      auto r = hh::eigen_check(f, hh::HeckeElement::single(f.field, key), w, engine);
      Json j{{"m", f.field.m()}, {"n", f.n}, {"k", w}, {"key", jio::to_json(key)},
             {"consistent", r.consistent}, {"lambda", r.lambda ? jio::to_json(*r.lambda) : Json(nullptr)},
             {"checked_indices", r.checked_indices}, {"certified_bound", jio::to_json(r.certified_bound)},
             {"detail", r.detail}};
      if (p) j["expected"] = jio::to_json(hh::eigenvalue_formula(f.field, f.n, w, p));
      return Result{j, r.consistent ? "lambda = " + hh::rational_to_string(*r.lambda) : "inconsistent: " + r.detail};
    };
  });

  // certify
  auto* cert = app.add_subcommand("certify", "Eisenstein characterisation certificate");
  cert->add_option("--form", form_file, "Expansion (default: E_k q-expansion with --terms)")->check(CLI::ExistingFile);
  cert->add_option("--m", m)->required()->check(CLI::PositiveNumber);
  cert->add_option("--k", k)->required();
  cert->add_option("--p", p)->required()->check(CLI::PositiveNumber);
  cert->add_option("--terms", terms)->check(CLI::PositiveNumber);
  cert->add_option("--avoid-p", avoid_p);
  cert->callback([&] {
    run = [&] {
      auto K = hh::QuadField::make(m);
      auto f = form_file.empty() ? hh::eisenstein_q_expansion(K, k, terms)
                                 : jio::expansion_from_json(jio::read_file(form_file));
      require_same_field(K, f.field.m());
      auto c = hh::certify_eisenstein(f, K, k, p, hh::class_representatives(K, avoid_p), enum_opts(g));
      std::ostringstream s;
      for (const auto& h : c.hypotheses) s << h.name << ": " << hh::to_string(h.status) << " (" << h.witness << ")\n";
      s << "conclusion: " << (c.conclusion ? "true" : "false");
      return Result{jio::to_json(c), s.str()};
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage_error", e.what(), 1);
  }

  try {
    Result r = run();
    r.artifact["seed"] = g.seed;
    const std::string text = r.artifact.dump(2) + "\n";
    if (!g.out.empty()) jio::write_file_atomic(g.out, text);
    if (g.json)
      std::cout << text;
    else
      std::cout << r.summary << "\n";
    return 0;
  } catch (const hh::ScopeError& e) {
    return emit_error("scope_error", e.what(), 2);
  } catch (const jio::FormatError& e) {
    return emit_error("malformed_input", e.what(), 1);
  } catch (const UsageError& e) {
    return emit_error("usage_error", e.what(), 1);
  } catch (const hh::ResourceError& e) {
    return emit_error("resource_cap", e.what(), 1);
  } catch (const hh::SearchExhausted& e) {
    return emit_error("search_exhausted", e.what(), 1);
  } catch (const hh::ConsistencyError& e) {
    return emit_error("consistency_failure", e.what(), 1);
  } catch (const nlohmann::json::exception& e) {
    return emit_error("malformed_input", e.what(), 1);
  } catch (const std::filesystem::filesystem_error& e) {
    return emit_error("io_error", e.what(), 1);
  } catch (const std::exception& e) {
    return emit_error("domain_error", e.what(), 1);
  }
}
