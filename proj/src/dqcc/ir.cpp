#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "dhisq/dqcc.hpp"
#include "dhisq/error.hpp"

namespace dhisq::dqcc {

namespace {

const std::set<std::string_view> kSingle{"h", "x", "y", "z", "s", "sdg", "t", "tdg", "sx", "id"};
const std::set<std::string_view> kTwo{"cx", "cz"};

struct Token {
  enum Kind { kIdent, kNumber, kSymbol, kEnd } kind = kEnd;
  std::string text;
  std::size_t line = 1;
  std::size_t col = 1;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::kIdent;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::kNumber;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (src.substr(i, 2) == "->" || src.substr(i, 2) == "==") {
      t.kind = Token::kSymbol;
      t.text = std::string(src.substr(i, 2));
      advance(2);
    } else if (std::string_view(";{}(),^!").find(c) != std::string_view::npos) {
      t.kind = Token::kSymbol;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  CircuitIR run() {
    while (peek().kind != Token::kEnd) statement(ir_.body, 0);
    return std::move(ir_);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SyntaxError(t.line, t.col, msg);
  }

  bool accept(std::string_view sym) {
    if (peek().kind == Token::kSymbol && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view sym) {
    if (!accept(sym)) fail(peek(), "expected '" + std::string(sym) + "'");
  }

  Token ident(const char* what) {
    if (peek().kind != Token::kIdent) fail(peek(), std::string("expected ") + what);
    return take();
  }

  std::string qubit() {
    Token t = ident("qubit name");
    if (ir_.qubit_index(t.text) < 0) fail(t, "undeclared qubit '" + t.text + "'");
    return t.text;
  }

  std::string bit() {
    Token t = ident("bit name");
    if (ir_.bit_index(t.text) < 0) fail(t, "undeclared bit '" + t.text + "'");
    return t.text;
  }

  void declare(std::vector<std::string>& into) {
    do {
      Token t = ident("name");
      if (kSingle.count(t.text) || kTwo.count(t.text) || t.text == "measure" || t.text == "if" ||
          t.text == "repeat" || t.text == "barrier" || t.text == "qubit" || t.text == "bit") {
        fail(t, "reserved word '" + t.text + "'");
      }
      if (ir_.qubit_index(t.text) >= 0 || ir_.bit_index(t.text) >= 0) {
        fail(t, "'" + t.text + "' already declared");
      }
      into.push_back(t.text);
    } while (accept(","));
    expect(";");
  }

  // depth 0: top level, 1: inside repeat, 2: inside if
  void statement(std::vector<Stmt>& out, int depth) {
    Token head = ident("statement");
    Stmt s;
    s.line = head.line;
    const std::string& w = head.text;
    if (w == "qubit" || w == "bit") {
      if (depth != 0) fail(head, "declarations are only allowed at top level");
      declare(w == "qubit" ? ir_.qubits : ir_.bits);
      return;
    }
    if (w == "measure") {
      s.kind = StmtKind::kMeasure;
      s.name = "measure";
      s.qubits.push_back(qubit());
      expect("->");
      s.bit = bit();
      expect(";");
      measured_.insert(s.bit);
    } else if (w == "barrier") {
      s.kind = StmtKind::kBarrier;
      s.name = "barrier";
      do {
        s.qubits.push_back(qubit());
        accept(",");
      } while (peek().kind == Token::kIdent);
      expect(";");
    } else if (w == "if") {
      if (depth == 2) fail(head, "nested conditionals are not supported");
      s.kind = StmtKind::kIf;
      expect("(");
      s.pred = predicate();
      expect(")");
      if (accept("{")) {
        while (!accept("}")) {
          if (peek().kind == Token::kEnd) fail(peek(), "unterminated block");
          statement(s.body, 2);
        }
      } else {
        statement(s.body, 2);
      }
    } else if (w == "repeat") {
      if (depth != 0) fail(head, "repeat is only allowed at top level");
      s.kind = StmtKind::kRepeat;
      if (peek().kind != Token::kNumber) fail(peek(), "expected repeat count");
      Token n = take();
      s.count = std::stoi(n.text);
      if (s.count < 1) fail(n, "repeat count must be positive");
      expect("{");
      while (!accept("}")) {
        if (peek().kind == Token::kEnd) fail(peek(), "unterminated block");
        statement(s.body, 1);
      }
    } else if (kSingle.count(w) || kTwo.count(w) || w == "cnot") {
      s.kind = StmtKind::kGate;
      s.name = w == "cnot" ? "cx" : w;
      std::size_t arity = kSingle.count(w) ? 1 : 2;
      while (peek().kind == Token::kIdent) {
        s.qubits.push_back(qubit());
        accept(",");
      }
      if (s.qubits.size() != arity) {
        fail(head, "'" + w + "' takes " + std::to_string(arity) + " qubit(s), got " +
                       std::to_string(s.qubits.size()));
      }
      if (arity == 2 && s.qubits[0] == s.qubits[1]) fail(head, "two-qubit gate on one qubit");
      expect(";");
    } else {
      fail(head, "unknown gate or statement '" + w + "'");
    }
    out.push_back(std::move(s));
  }

  Predicate predicate() {
    Predicate p;
    if (accept("!")) p.negate = true;
    do {
      Token t = peek();
      std::string b = bit();
      if (!measured_.count(b)) fail(t, "conditional on bit '" + b + "' before it is measured");
      p.bits.push_back(b);
    } while (accept("^"));
    if (accept("==")) {
      if (peek().kind != Token::kNumber || (peek().text != "0" && peek().text != "1")) {
        fail(peek(), "expected 0 or 1");
      }
      if (take().text == "0") p.negate = !p.negate;
    }
    return p;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  CircuitIR ir_;
  std::set<std::string> measured_;
};

void print_stmt(std::ostream& out, const Stmt& s, int indent) {
  std::string pad(indent, ' ');
  switch (s.kind) {
    case StmtKind::kGate:
    case StmtKind::kBarrier:
      out << pad << s.name;
      for (const auto& q : s.qubits) out << ' ' << q;
      out << ";\n";
      break;
    case StmtKind::kMeasure:
      out << pad << "measure " << s.qubits[0] << " -> " << s.bit << ";\n";
      break;
    case StmtKind::kIf: {
      out << pad << "if (" << (s.pred.negate ? "!" : "");
      for (std::size_t i = 0; i < s.pred.bits.size(); ++i) out << (i ? " ^ " : "") << s.pred.bits[i];
      out << ") {\n";
      for (const auto& b : s.body) print_stmt(out, b, indent + 2);
      out << pad << "}\n";
      break;
    }
    case StmtKind::kRepeat:
      out << pad << "repeat " << s.count << " {\n";
      for (const auto& b : s.body) print_stmt(out, b, indent + 2);
      out << pad << "}\n";
      break;
  }
}

}  // namespace

int CircuitIR::qubit_index(const std::string& name) const {
  auto it = std::find(qubits.begin(), qubits.end(), name);
  return it == qubits.end() ? -1 : static_cast<int>(it - qubits.begin());
}

int CircuitIR::bit_index(const std::string& name) const {
  auto it = std::find(bits.begin(), bits.end(), name);
  return it == bits.end() ? -1 : static_cast<int>(it - bits.begin());
}

bool is_single_qubit_gate(std::string_view name) { return kSingle.count(name) > 0; }
bool is_two_qubit_gate(std::string_view name) { return kTwo.count(name) > 0; }

CircuitIR parse_ir(std::string_view text) { return Parser(text).run(); }

std::string print_ir(const CircuitIR& ir) {
  std::ostringstream out;
  for (const auto& q : ir.qubits) out << "qubit " << q << ";\n";
  for (const auto& b : ir.bits) out << "bit " << b << ";\n";
  for (const auto& s : ir.body) print_stmt(out, s, 0);
  return out.str();
}

}  // namespace dhisq::dqcc
