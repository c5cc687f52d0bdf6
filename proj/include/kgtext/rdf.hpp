#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgtext {

// One (subject, predicate, object) statement. Fields are surface labels,
// trimmed at construction; they may not contain the marker tokens used by
// linearize(), since no escaping is defined for them.
struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;

  Triple(std::string subject, std::string predicate, std::string object);

  bool operator==(const Triple&) const = default;
};

// Ordered, non-empty sequence of triples. Order is preserved: linearization
// follows the stored order and nothing sorts it silently.
struct RdfGraph {
  std::vector<Triple> triples;

  explicit RdfGraph(std::vector<Triple> triples);

  std::size_t size() const { return triples.size(); }
  bool operator==(const RdfGraph&) const = default;
};

// Predicates whose truth is unchanged by swapping subject and object.
// Lookup is exact match after trimming and case-folding.
class SymmetricRegistry {
 public:
  SymmetricRegistry() = default;
  explicit SymmetricRegistry(const std::vector<std::string>& predicates);

  // The built-in default list of 15 symmetric relations.
  static const SymmetricRegistry& defaults();

  // One predicate per line; '#' starts a comment; blank lines ignored.
  static SymmetricRegistry load(const std::string& path);

  bool contains(std::string_view predicate) const;
  std::size_t size() const { return predicates_.size(); }

 private:
  std::set<std::string> predicates_;
};

// "[S] <subj> [P] <pred> [O] <obj>" per triple, single-space separated,
// triples concatenated in stored order.
std::string linearize(const RdfGraph& g);

// Inverse of linearize for marker-free graphs. Throws ParseError with a
// position on missing markers, empty fields or leading garbage.
RdfGraph parse_linearized(const std::string& s);

// Swaps subject and object; the predicate is untouched. Mechanical even for
// symmetric predicates; filtering by symmetry is the caller's job.
Triple invert_triple(const Triple& t);

bool is_symmetric(std::string_view predicate, const SymmetricRegistry& registry);

}  // namespace kgtext
