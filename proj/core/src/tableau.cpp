#include "srk/tableau.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

namespace srk {

std::string to_string(TableauMode mode) {
  switch (mode) {
    case TableauMode::general_ito: return "general-ito";
    case TableauMode::general_strat: return "general-strat";
    case TableauMode::commutative_ito: return "commutative-ito";
    case TableauMode::commutative_strat: return "commutative-strat";
    case TableauMode::additive: return "additive";
  }
  return "?";
}

TableauMode tableau_mode_from_string(const std::string& name) {
  if (name == "general-ito") return TableauMode::general_ito;
  if (name == "general-strat") return TableauMode::general_strat;
  if (name == "commutative-ito") return TableauMode::commutative_ito;
  if (name == "commutative-strat") return TableauMode::commutative_strat;
  if (name == "additive") return TableauMode::additive;
  throw std::invalid_argument("unknown tableau mode: " + name);
}

double stoch_order_value(StochOrder o) {
  switch (o) {
    case StochOrder::none: return 0.0;
    case StochOrder::half: return 0.5;
    case StochOrder::one: return 1.0;
  }
  return 0.0;
}

int det_order_value(DetOrder o) {
  switch (o) {
    case DetOrder::none: return 0;
    case DetOrder::one: return 1;
    case DetOrder::two: return 2;
  }
  return 0;
}

void ExtendedTableau::validate() const {
  if (s < 1) throw std::invalid_argument("tableau needs s >= 1 stages");
  auto need_vec = [&](const std::vector<Rational>& v, const char* what) {
    if (static_cast<int>(v.size()) != s)
      throw std::invalid_argument(std::string(what) + " must have length s");
  };
  auto need_mat = [&](const std::vector<std::vector<Rational>>& m,
                      const char* what) {
    if (static_cast<int>(m.size()) != s)
      throw std::invalid_argument(std::string(what) + " must be s x s");
    for (const auto& row : m)
      if (static_cast<int>(row.size()) != s)
        throw std::invalid_argument(std::string(what) + " must be s x s");
  };
  need_vec(c0, "c0");
  need_vec(c1, "c1");
  need_vec(alpha, "alpha");
  need_vec(beta1, "beta1");
  need_vec(beta2, "beta2");
  need_mat(A0, "A0");
  need_mat(A1, "A1");
  need_mat(B1, "B1");
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j)
      if (!B1[i][j].is_zero())
        throw std::invalid_argument("B1 not strictly lower triangular");
}

bool ExtendedTableau::drift_implicit() const {
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j)
      if (!A0[i][j].is_zero()) return true;
  return false;
}

namespace {

struct Checker {
  const ExtendedTableau& t;
  OrderReport& rep;
  double tol = 1e-12;

  // Returns the satisfied flag for chaining.
  bool add(const std::string& id, const Rational& required, Rational lhs_exact,
           bool have_exact, double lhs_double) {
    ConditionResult c;
    c.id = id;
    c.required = required.to_double();
    if (have_exact) {
      c.lhs = lhs_exact.to_double();
      c.exact = (lhs_exact == required);
      c.satisfied = c.exact || std::fabs(c.lhs - c.required) <= tol;
    } else {
      c.lhs = lhs_double;
      c.exact = false;
      c.satisfied = std::fabs(c.lhs - c.required) <= tol;
      rep.all_exact = false;
    }
    rep.conditions.push_back(c);
    return c.satisfied;
  }
};

// Sums that may overflow run twice: once in rationals, once in doubles.
template <typename RatFn, typename DblFn>
bool add_condition(Checker& ck, const std::string& id, const Rational& required,
                   RatFn&& rat, DblFn&& dbl) {
  try {
    Rational v = rat();
    return ck.add(id, required, v, true, 0.0);
  } catch (const RationalOverflow&) {
    return ck.add(id, required, Rational(0), false, dbl());
  }
}

}  // namespace

OrderReport check_order_conditions(const ExtendedTableau& t, TableauMode mode) {
  t.validate();
  OrderReport rep;
  rep.mode = mode;
  rep.all_exact = true;
  Checker ck{t, rep};

  const int s = t.s;
  auto rsum = [&](auto&& term) {
    Rational acc(0);
    for (int i = 0; i < s; ++i) acc += term(i);
    return acc;
  };
  auto dsum = [&](auto&& term) {
    double acc = 0.0;
    for (int i = 0; i < s; ++i) acc += term(i);
    return acc;
  };

  auto weight_sum = [&](const std::vector<Rational>& w, const std::string& id,
                        const Rational& req) {
    return add_condition(
        ck, id, req, [&] { return rsum([&](int i) { return w[i]; }); },
        [&] { return dsum([&](int i) { return w[i].to_double(); }); });
  };
  auto weighted_dot = [&](const std::vector<Rational>& w,
                          const std::vector<Rational>& v, const std::string& id,
                          const Rational& req) {
    return add_condition(
        ck, id, req, [&] { return rsum([&](int i) { return w[i] * v[i]; }); },
        [&] {
          return dsum(
              [&](int i) { return w[i].to_double() * v[i].to_double(); });
        });
  };
  auto weighted_rowsum = [&](const std::vector<Rational>& w,
                             const std::vector<std::vector<Rational>>& M,
                             const std::string& id, const Rational& req) {
    return add_condition(
        ck, id, req,
        [&] {
          return rsum([&](int i) {
            Rational row(0);
            for (int j = 0; j < s; ++j) row += M[i][j];
            return w[i] * row;
          });
        },
        [&] {
          return dsum([&](int i) {
            double row = 0.0;
            for (int j = 0; j < s; ++j) row += M[i][j].to_double();
            return w[i].to_double() * row;
          });
        });
  };

  bool stoch_half = true;
  bool stoch_one = true;
  if (mode == TableauMode::additive) {
    stoch_one &= weight_sum(t.alpha, "alpha^T e", Rational(1));
    stoch_one &= weight_sum(t.beta1, "beta1^T e", Rational(1));
    rep.ps = stoch_one ? StochOrder::one : StochOrder::none;
  } else {
    stoch_half &= weight_sum(t.alpha, "alpha^T e", Rational(1));
    stoch_half &= weight_sum(t.beta1, "beta1^T e", Rational(1));
    stoch_half &= weight_sum(t.beta2, "beta2^T e", Rational(0));
    stoch_half &= weighted_dot(t.beta2, t.c1, "beta2^T c1", Rational(0));
    stoch_half &= weighted_rowsum(t.beta2, t.A1, "beta2^T A1 e", Rational(0));
    stoch_one = stoch_half;
    stoch_one &= weighted_rowsum(t.beta2, t.B1, "beta2^T B1 e", Rational(1));
    const bool strat = mode == TableauMode::general_strat ||
                       mode == TableauMode::commutative_strat;
    if (strat) {
      // The half-order certificate needs the full condition set here; only
      // orders {1, none} are distinguished.
      rep.ps = stoch_one ? StochOrder::one : StochOrder::none;
    } else {
      rep.ps = stoch_one    ? StochOrder::one
               : stoch_half ? StochOrder::half
                            : StochOrder::none;
    }
  }

  bool det_one = weight_sum(t.alpha, "alpha^T e (det)", Rational(1));
  bool det_two =
      weighted_dot(t.alpha, t.c0, "alpha^T c0", Rational(1, 2));
  rep.pd = det_one ? (det_two ? DetOrder::two : DetOrder::one) : DetOrder::none;
  return rep;
}

namespace {

ExtendedTableau make_zero(int s, std::string name) {
  ExtendedTableau t;
  t.s = s;
  t.name = std::move(name);
  t.c0.assign(s, Rational(0));
  t.c1.assign(s, Rational(0));
  t.alpha.assign(s, Rational(0));
  t.beta1.assign(s, Rational(0));
  t.beta2.assign(s, Rational(0));
  t.A0.assign(s, std::vector<Rational>(s, Rational(0)));
  t.A1.assign(s, std::vector<Rational>(s, Rational(0)));
  t.B1.assign(s, std::vector<Rational>(s, Rational(0)));
  return t;
}

std::map<std::string, ExtendedTableau> make_builtins() {
  std::map<std::string, ExtendedTableau> out;

  {
    ExtendedTableau t = make_zero(1, "EM");
    t.alpha[0] = Rational(1);
    t.beta1[0] = Rational(1);
    out["EM"] = t;
  }
  {
    ExtendedTableau t = make_zero(1, "SSBE");
    t.alpha[0] = Rational(1);
    t.beta1[0] = Rational(1);
    t.A0[0][0] = Rational(1);
    t.A1[0][0] = Rational(1);
    t.c0[0] = Rational(1);
    t.c1[0] = Rational(1);
    out["SSBE"] = t;
  }
  {
    ExtendedTableau t = make_zero(2, "SRI2s1");
    t.alpha = {Rational(1), Rational(0)};
    t.beta1 = {Rational(1), Rational(0)};
    t.beta2 = {Rational(-1), Rational(1)};
    t.B1[1][0] = Rational(1);
    out["SRI2s1"] = t;
  }
  {
    ExtendedTableau t = out["SRI2s1"];
    t.name = "SRI2s2";
    t.alpha = {Rational(1, 2), Rational(1, 2)};
    t.c0 = {Rational(0), Rational(1)};
    t.A0[1][0] = Rational(1);
    out["SRI2s2"] = t;
  }
  {
    ExtendedTableau t = make_zero(1, "SRA2s1");
    t.alpha[0] = Rational(1);
    t.beta1[0] = Rational(1);
    t.additive_hint = true;
    out["SRA2s1"] = t;
  }
  {
    ExtendedTableau t = make_zero(2, "SRA2s2");
    t.alpha = {Rational(1, 2), Rational(1, 2)};
    t.beta1 = {Rational(1), Rational(0)};
    t.c0 = {Rational(0), Rational(1)};
    t.A0[1][0] = Rational(1);
    t.additive_hint = true;
    out["SRA2s2"] = t;
  }
  return out;
}

const std::map<std::string, ExtendedTableau>& builtins() {
  static const std::map<std::string, ExtendedTableau> b = make_builtins();
  return b;
}

}  // namespace

const ExtendedTableau& builtin_tableau(const std::string& name) {
  const auto& b = builtins();
  auto it = b.find(name);
  if (it == b.end())
    throw std::invalid_argument("unknown builtin tableau: " + name);
  return it->second;
}

const std::vector<std::string>& builtin_tableau_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : builtins()) v.push_back(k);
    return v;
  }();
  return names;
}

namespace {

struct Token {
  enum Kind { ident, number, string_lit, equals, lbracket, rbracket, comma, end };
  Kind kind;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_space_and_comments();
    if (pos_ >= text_.size()) return {Token::end, ""};
    const char c = text_[pos_];
    if (c == '=') return ++pos_, Token{Token::equals, "="};
    if (c == '[') return ++pos_, Token{Token::lbracket, "["};
    if (c == ']') return ++pos_, Token{Token::rbracket, "]"};
    if (c == ',') return ++pos_, Token{Token::comma, ","};
    if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') s += text_[pos_++];
      if (pos_ >= text_.size()) throw TableauParseError("unterminated string");
      ++pos_;
      return {Token::string_lit, s};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        s += text_[pos_++];
      return {Token::ident, s};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
        c == '.') {
      std::string s;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '+' || text_[pos_] == '-' || text_[pos_] == '.' ||
              text_[pos_] == '/'))
        s += text_[pos_++];
      return {Token::number, s};
    }
    throw TableauParseError(std::string("unexpected character '") + c + "'");
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

Rational parse_entry(const std::string& text) {
  try {
    return Rational::parse(text);
  } catch (const std::exception& e) {
    throw TableauParseError(e.what());
  }
}

}  // namespace

ExtendedTableau parse_tableau(const std::string& text) {
  Lexer lex(text);
  std::map<std::string, std::vector<Rational>> vectors;
  std::map<std::string, std::vector<std::vector<Rational>>> matrices;
  std::map<std::string, Rational> scalars;
  std::string name;
  bool have_name = false;

  Token tok = lex.next();
  while (tok.kind != Token::end) {
    if (tok.kind != Token::ident)
      throw TableauParseError("expected key, got '" + tok.text + "'");
    const std::string key = tok.text;
    if (lex.next().kind != Token::equals)
      throw TableauParseError("expected '=' after key " + key);
    Token val = lex.next();
    if (val.kind == Token::number) {
      if (!scalars.emplace(key, parse_entry(val.text)).second)
        throw TableauParseError("duplicate key " + key);
    } else if (val.kind == Token::string_lit) {
      if (key != "name") throw TableauParseError("string value for key " + key);
      if (have_name) throw TableauParseError("duplicate key name");
      name = val.text;
      have_name = true;
    } else if (val.kind == Token::lbracket) {
      Token first = lex.next();
      if (first.kind == Token::lbracket) {
        // matrix: [[..], [..], ...]
        std::vector<std::vector<Rational>> rows;
        for (;;) {
          std::vector<Rational> row;
          Token e = lex.next();
          while (e.kind == Token::number) {
            row.push_back(parse_entry(e.text));
            e = lex.next();
            if (e.kind == Token::comma) e = lex.next();
          }
          if (e.kind != Token::rbracket)
            throw TableauParseError("malformed matrix row in " + key);
          rows.push_back(std::move(row));
          Token sep = lex.next();
          if (sep.kind == Token::comma) {
            Token open = lex.next();
            if (open.kind != Token::lbracket)
              throw TableauParseError("expected row in matrix " + key);
            continue;
          }
          if (sep.kind == Token::rbracket) break;
          throw TableauParseError("malformed matrix " + key);
        }
        if (!matrices.emplace(key, std::move(rows)).second)
          throw TableauParseError("duplicate key " + key);
      } else {
        std::vector<Rational> vec;
        Token e = first;
        while (e.kind == Token::number) {
          vec.push_back(parse_entry(e.text));
          e = lex.next();
          if (e.kind == Token::comma) e = lex.next();
        }
        if (e.kind != Token::rbracket)
          throw TableauParseError("malformed vector " + key);
        if (!vectors.emplace(key, std::move(vec)).second)
          throw TableauParseError("duplicate key " + key);
      }
    } else {
      throw TableauParseError("unexpected value for key " + key);
    }
    tok = lex.next();
  }

  auto sit = scalars.find("s");
  if (sit == scalars.end()) throw TableauParseError("missing key s");
  if (!sit->second.is_integer() || sit->second.num() < 1 ||
      sit->second.num() > 64)
    throw TableauParseError("s must be an integer in 1..64");
  const int s = static_cast<int>(sit->second.num());
  scalars.erase(sit);
  if (!scalars.empty())
    throw TableauParseError("unknown scalar key " + scalars.begin()->first);

  ExtendedTableau t = make_zero(s, have_name ? name : "custom");

  auto take_vec = [&](const char* key, std::vector<Rational>& dst,
                      bool required) {
    auto it = vectors.find(key);
    if (it == vectors.end()) {
      if (required) throw TableauParseError(std::string("missing key ") + key);
      return false;
    }
    if (static_cast<int>(it->second.size()) != s)
      throw TableauParseError(std::string(key) + " must have length s");
    dst = std::move(it->second);
    vectors.erase(it);
    return true;
  };
  auto take_mat = [&](const char* key, std::vector<std::vector<Rational>>& dst) {
    auto it = matrices.find(key);
    if (it == matrices.end()) return;
    if (static_cast<int>(it->second.size()) != s)
      throw TableauParseError(std::string(key) + " must be s x s");
    for (const auto& row : it->second)
      if (static_cast<int>(row.size()) != s)
        throw TableauParseError(std::string(key) + " must be s x s");
    dst = std::move(it->second);
    matrices.erase(it);
  };

  take_vec("alpha", t.alpha, true);
  take_vec("beta1", t.beta1, true);
  t.additive_hint = !take_vec("beta2", t.beta2, false);
  take_vec("c0", t.c0, false);
  take_vec("c1", t.c1, false);
  take_mat("A0", t.A0);
  take_mat("A1", t.A1);
  take_mat("B1", t.B1);
  if (!vectors.empty())
    throw TableauParseError("unknown key " + vectors.begin()->first);
  if (!matrices.empty())
    throw TableauParseError("unknown key " + matrices.begin()->first);

  t.validate();
  return t;
}

namespace {

std::string vec_str(const std::vector<Rational>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += v[i].str();
  }
  return out + "]";
}

std::string mat_str(const std::vector<std::vector<Rational>>& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) out += ", ";
    out += vec_str(m[i]);
  }
  return out + "]";
}

}  // namespace

std::string serialize_tableau(const ExtendedTableau& t) {
  t.validate();
  std::ostringstream os;
  os << "name = \"" << t.name << "\"\n";
  os << "s = " << t.s << "\n";
  os << "c0 = " << vec_str(t.c0) << "\n";
  os << "c1 = " << vec_str(t.c1) << "\n";
  os << "alpha = " << vec_str(t.alpha) << "\n";
  os << "beta1 = " << vec_str(t.beta1) << "\n";
  if (!t.additive_hint) os << "beta2 = " << vec_str(t.beta2) << "\n";
  os << "A0 = " << mat_str(t.A0) << "\n";
  os << "A1 = " << mat_str(t.A1) << "\n";
  os << "B1 = " << mat_str(t.B1) << "\n";
  return os.str();
}

}  // namespace srk
