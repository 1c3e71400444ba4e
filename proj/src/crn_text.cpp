#include "mlecrn/crn_text.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "mlecrn/error.hpp"

namespace mlecrn {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

struct RawTerm {
  std::int64_t coefficient;
  std::string species;
};

struct RawReaction {
  std::vector<RawTerm> left;
  std::vector<RawTerm> right;
  bool reversible = false;
  double forward = 1.0;
  double backward = 1.0;
  std::size_t line = 0;
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class LineScanner {
 public:
  LineScanner(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& what, ErrorCode code = ErrorCode::ParseError) const {
    throw Error(code, "line " + std::to_string(line_) + ", column " + std::to_string(pos_ + 1) +
                          ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  std::string name() {
    skip_ws();
    if (pos_ >= text_.size() || !is_name_start(text_[pos_])) fail("expected species name");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::int64_t integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    const std::string digits(text_.substr(start, pos_ - start));
    if (digits.size() > 15) fail("coefficient too large");
    return std::stoll(digits);
  }

  double rate() {
    skip_ws();
    const std::string rest(text_.substr(pos_));
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str() || errno == ERANGE) fail("expected a rate");
    if (!(v > 0.0) || !std::isfinite(v)) fail("rates must be positive and finite");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return v;
  }

  std::vector<RawTerm> side() {
    std::vector<RawTerm> terms;
    skip_ws();
    if (peek() == '0') {
      const std::size_t save = pos_;
      const std::int64_t zero = integer();
      const char next = peek();
      if (zero == 0 && !is_name_start(next)) return terms;
      pos_ = save;
    }
    while (true) {
      std::int64_t coef = 1;
      if (is_digit(peek())) {
        coef = integer();
        if (coef == 0) fail("coefficient 0 is not allowed", ErrorCode::UndeclaredCoefficient);
      }
      terms.push_back({coef, name()});
      if (!consume("+")) break;
    }
    return terms;
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string term_text(std::int64_t coef, const std::string& name) {
  return coef == 1 ? name : std::to_string(coef) + " " + name;
}

std::string side_text(const IntVector& y, const std::vector<std::string>& species) {
  std::string out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) continue;
    if (!out.empty()) out += " + ";
    out += term_text(y[i], species[i]);
  }
  return out.empty() ? "0" : out;
}

}  // namespace

ParsedNetwork parse_crn(std::string_view text) {
  std::vector<std::string> declared;
  bool has_declaration = false;
  std::vector<RawReaction> raw;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineScanner scan(line, line_no);
    if (scan.at_end()) continue;

    if (line.find("->") == std::string_view::npos && line.find('@') == std::string_view::npos) {
      if (scan.name() != "species") {
        scan = LineScanner(line, line_no);
        scan.side();
        scan.fail("expected '->' or '<->'");
      }
      if (has_declaration) scan.fail("duplicate species declaration");
      if (!raw.empty()) scan.fail("species declaration must precede reactions");
      has_declaration = true;
      std::set<std::string> seen;
      while (!scan.at_end()) {
        std::string name = scan.name();
        if (!seen.insert(name).second) scan.fail("species '" + name + "' declared twice");
        declared.push_back(std::move(name));
        scan.consume(",");
      }
      continue;
    }

    RawReaction r;
    r.line = line_no;
    r.left = scan.side();
    if (scan.consume("<->")) {
      r.reversible = true;
    } else if (!scan.consume("->")) {
      scan.fail("expected '->' or '<->'");
    }
    r.right = scan.side();
    if (!scan.consume("@")) scan.fail("expected '@' followed by a rate");
    r.forward = scan.rate();
    if (r.reversible) {
      if (!scan.consume(",")) scan.fail("reversible reactions need two rates 'kf,kr'");
      r.backward = scan.rate();
    }
    if (!scan.at_end()) scan.fail("unexpected trailing input");
    raw.push_back(std::move(r));
  }

  std::vector<std::string> species = declared;
  if (!has_declaration) {
    std::set<std::string> seen;
    for (const auto& r : raw)
      for (const auto* side : {&r.left, &r.right})
        for (const auto& t : *side)
          if (seen.insert(t.species).second) species.push_back(t.species);
  }

  ParsedNetwork out{ReactionNetwork(species), {}};
  std::map<std::pair<IntVector, IntVector>, std::size_t> seen_reactions;
  auto vectorize = [&](const std::vector<RawTerm>& terms, std::size_t line) {
    IntVector y(species.size(), 0);
    for (const auto& t : terms) {
      const std::size_t idx = out.network.index_of(t.species);
      if (idx == species.size()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": species '" +
                                               t.species + "' is not declared");
      }
      y[idx] += t.coefficient;
    }
    return y;
  };
  auto add = [&](IntVector from, IntVector to, double rate, std::size_t line) {
    if (from == to) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line) + ": reactant and product complexes are identical");
    }
    auto [it, inserted] = seen_reactions.emplace(std::make_pair(from, to), line);
    if (!inserted) {
      out.warnings.push_back("line " + std::to_string(line) + ": duplicate of reaction on line " +
                             std::to_string(it->second));
    }
    out.network.add_reaction({std::move(from), std::move(to), rate});
  };
  for (const auto& r : raw) {
    IntVector left = vectorize(r.left, r.line);
    IntVector right = vectorize(r.right, r.line);
    add(left, right, r.forward, r.line);
    if (r.reversible) add(right, left, r.backward, r.line);
  }
  return out;
}

std::string emit_crn(const ReactionNetwork& net) {
  std::ostringstream out;
  out << "species";
  for (const auto& s : net.species()) out << ' ' << s;
  out << '\n';
  const auto& rs = net.reactions();
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const Reaction& r = rs[k];
    const bool paired = k + 1 < rs.size() && rs[k + 1].reactant == r.product &&
                        rs[k + 1].product == r.reactant;
    out << side_text(r.reactant, net.species()) << (paired ? " <-> " : " -> ")
        << side_text(r.product, net.species()) << " @ " << format_double(r.rate);
    if (paired) {
      out << ',' << format_double(rs[k + 1].rate);
      ++k;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mlecrn
