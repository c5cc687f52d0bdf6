#include "kgtext/rdf.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "kgtext/errors.hpp"

namespace kgtext {

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr std::array<std::string_view, 3> kMarkers = {"[S]", "[P]", "[O]"};

std::string validate_field(std::string field, const char* name) {
  field = trim(field);
  if (field.empty()) {
    throw ValidationError(std::string("triple ") + name + " is empty after trimming");
  }
  for (auto marker : kMarkers) {
    if (field.find(marker) != std::string::npos) {
      throw ValidationError(std::string("triple ") + name + " contains marker token " +
                            std::string(marker) + ": \"" + field + "\"");
    }
  }
  return field;
}

}  // namespace

Triple::Triple(std::string subject_in, std::string predicate_in, std::string object_in)
    : subject(validate_field(std::move(subject_in), "subject")),
      predicate(validate_field(std::move(predicate_in), "predicate")),
      object(validate_field(std::move(object_in), "object")) {}

RdfGraph::RdfGraph(std::vector<Triple> triples_in) : triples(std::move(triples_in)) {
  if (triples.empty()) {
    throw ValidationError("RdfGraph must contain at least one triple");
  }
}

SymmetricRegistry::SymmetricRegistry(const std::vector<std::string>& predicates) {
  for (const auto& p : predicates) {
    auto key = fold_case(trim(p));
    if (!key.empty()) predicates_.insert(std::move(key));
  }
}

const SymmetricRegistry& SymmetricRegistry::defaults() {
  static const SymmetricRegistry registry({
      "taxon synonym",
      "partner in business or sport",
      "opposite of",
      "partially coincident with",
      "physically interacts with",
      "partner",
      "relative",
      "related category",
      "connects with",
      "twinned administrative body",
      "different from",
      "said to be the same as",
      "sibling",
      "adjacent station",
      "shares border with",
  });
  return registry;
}

SymmetricRegistry SymmetricRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open registry file: " + path);
  std::vector<std::string> predicates;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (!line.empty()) predicates.push_back(line);
  }
  return SymmetricRegistry(predicates);
}

bool SymmetricRegistry::contains(std::string_view predicate) const {
  return predicates_.count(fold_case(trim(predicate))) > 0;
}

std::string linearize(const RdfGraph& g) {
  std::ostringstream out;
  bool first = true;
  for (const auto& t : g.triples) {
    if (!first) out << ' ';
    first = false;
    out << "[S] " << t.subject << " [P] " << t.predicate << " [O] " << t.object;
  }
  return out.str();
}

RdfGraph parse_linearized(const std::string& s) {
  // Marker occurrences in order of appearance; they must cycle S, P, O.
  struct Hit {
    std::size_t pos;
    int kind;  // 0=[S] 1=[P] 2=[O]
  };
  std::vector<Hit> hits;
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i] != '[' || s[i + 2] != ']') continue;
    switch (s[i + 1]) {
      case 'S': hits.push_back({i, 0}); break;
      case 'P': hits.push_back({i, 1}); break;
      case 'O': hits.push_back({i, 2}); break;
      default: break;
    }
  }
  if (hits.empty()) throw ParseError("no [S]/[P]/[O] markers found", 0);
  if (!trim(s.substr(0, hits[0].pos)).empty()) {
    throw ParseError("text before first marker", 0);
  }
  if (hits[0].kind != 0) throw ParseError("expected [S] first", hits[0].pos);
  if (hits.size() % 3 != 0) {
    throw ParseError("marker count not a multiple of three", hits.back().pos);
  }

  std::vector<Triple> triples;
  for (std::size_t i = 0; i < hits.size(); i += 3) {
    if (hits[i].kind != 0 || hits[i + 1].kind != 1 || hits[i + 2].kind != 2) {
      throw ParseError("markers out of [S] [P] [O] order", hits[i].pos);
    }
    auto field = [&](std::size_t h) {
      std::size_t begin = hits[h].pos + 3;
      std::size_t end = (h + 1 < hits.size()) ? hits[h + 1].pos : s.size();
      auto text = trim(s.substr(begin, end - begin));
      if (text.empty()) throw ParseError("empty field after marker", hits[h].pos);
      return text;
    };
    triples.emplace_back(field(i), field(i + 1), field(i + 2));
  }
  return RdfGraph(std::move(triples));
}

Triple invert_triple(const Triple& t) { return Triple(t.object, t.predicate, t.subject); }

bool is_symmetric(std::string_view predicate, const SymmetricRegistry& registry) {
  return registry.contains(predicate);
}

}  // namespace kgtext
