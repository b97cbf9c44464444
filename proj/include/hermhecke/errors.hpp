#pragma once

#include <stdexcept>
#include <string>

namespace hermhecke {

/// Input lies outside the part of the theory this library handles
/// (e.g. a similitude factor with split or ramified prime divisors).
class ScopeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An enumeration exceeded its configured candidate cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An identity that must hold by construction was violated. Seeing one of
/// these means a bug in enumeration or arithmetic, not bad input.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A bounded search ran to its limit without a hit.
class SearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HERMHECKE_STR2(x) #x
#define HERMHECKE_STR(x) HERMHECKE_STR2(x)
#define HERMHECKE_CHECK(cond, msg)                                         \
  do {                                                                     \
    if (!(cond))                                                           \
      throw ::hermhecke::ConsistencyError(std::string(__FILE__ ":" HERMHECKE_STR( \
          __LINE__) ": ") + (msg));                                        \
  } while (0)

}  // namespace hermhecke
