#include <functional>

#include "clisp/frontend.hpp"
#include "corpus.hpp"
#include "doctest.h"

using namespace clisp;

namespace {

const char* kMuladd = R"(
(define ((muladd void) (res (ptr int64)) (a int) (b int))
    (declare mul_res int)
    (set mul_res (mul a b))
    (store res (add (load res) (sext mul_res int64))))
)";

Module parse(std::string_view text) { return parse_module(parse_sexprs(text)); }

CheckResult check(std::string_view text) { return typecheck(parse(text)); }

std::vector<TypeError> errors_in(const std::string& body, const std::string& prelude = "") {
  return check(prelude + "(define ((f void) (x int) (w int64) (p (ptr int64)) (c int8) (d float64))\n" + body + ")")
      .errors;
}

void check_parse_error(std::string_view text, const std::string& fragment) {
  try {
    parse(text);
    FAIL("expected ParseError for " << text);
  } catch (const ParseError& e) {
    CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, std::string(e.what()));
  }
}

void walk_exprs(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& op : e.operands) walk_exprs(op, fn);
}

void walk_stmts(const std::vector<Stmt>& body, const std::function<void(const Expr&)>& fn) {
  for (const auto& s : body) {
    for (const auto& e : s.exprs) walk_exprs(e, fn);
    walk_stmts(s.body, fn);
    walk_stmts(s.else_body, fn);
  }
}

}  // namespace

TEST_CASE("parse_module: muladd") {
  Module m = parse(kMuladd);
  REQUIRE(m.functions.size() == 1);
  const FunctionDef& f = m.functions[0];
  CHECK(f.sig.name == "muladd");
  CHECK(f.sig.return_type == Type::void_type());
  REQUIRE(f.sig.params.size() == 3);
  CHECK(f.sig.params[0] == Param{"res", Type::ptr(Type::int64())});
  CHECK(f.sig.params[1] == Param{"a", Type::int32()});
  CHECK(f.sig.params[2] == Param{"b", Type::int32()});
  REQUIRE(f.body.size() == 3);
  CHECK(f.body[0].kind == Stmt::Kind::Declare);
  CHECK(f.body[1].kind == Stmt::Kind::Set);
  CHECK(f.body[2].kind == Stmt::Kind::Store);
}

TEST_CASE("parse_module: top-level shapes") {
  Module m = parse("(define ((f int)))");
  REQUIRE(m.functions.size() == 1);
  CHECK(m.functions[0].sig.params.empty());
  CHECK(m.functions[0].body.empty());

  m = parse("(declare-fn getchar () int)");
  REQUIRE(m.externs.size() == 1);
  CHECK(m.externs[0].name == "getchar");
  CHECK(m.externs[0].return_type == Type::int32());
  CHECK(m.externs[0].params.empty());

  m = parse("(struct Pair (first int) (next (ptr Pair)))");
  REQUIRE(m.structs.size() == 1);
  CHECK(m.structs[0].fields[1].type == Type::ptr(Type::named_struct("Pair")));
}

TEST_CASE("parse_module: errors") {
  check_parse_error("(defun f)", "defun");
  check_parse_error("(define ((f int)) (frobnicate 1))", "frobnicate");
  check_parse_error("(define ((f int)) (ret (add 1)))", "add");
  check_parse_error("(define ((f int)) (declare 3 int))", "");
  check_parse_error("(define ((f int)) (ret ,EOF))", "unquote");
  check_parse_error("(define ((f int)) ,@(stuff))", "unquote-splicing");
  check_parse_error("(declare-fn f (int) int)", "");
  check_parse_error("(define ((f int)) (ret (sext 1 (vector int))))", "");
  check_parse_error("42", "");
}

TEST_CASE("parse errors carry positions") {
  try {
    parse("(define ((f int))\n  (ret (bogus 1)))");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.position());
    CHECK(*e.position() == SourcePosition{2, 9});
  }
}

TEST_CASE("typecheck: muladd types") {
  CheckResult r = check(kMuladd);
  REQUIRE(r.ok());
  const auto& body = r.module->module.functions[0].body;
  CHECK(body[1].exprs[0].op == Opcode::Mul);
  CHECK(*body[1].exprs[0].type == Type::int32());
  CHECK(body[2].exprs[1].op == Opcode::Add);
  CHECK(*body[2].exprs[1].type == Type::int64());
}

TEST_CASE("typecheck: the cast must be explicit") {
  auto errors = check(R"(
(define ((muladd void) (res (ptr int64)) (a int) (b int))
    (declare mul_res int)
    (set mul_res (mul a b))
    (store res (add (load res) mul_res))))").errors;
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].expected == Type::int64());
  CHECK(errors[0].actual == Type::int32());
  CHECK(errors[0].message.find("expected int64, got int") != std::string::npos);
  REQUIRE(errors[0].pos);
  CHECK(errors[0].pos->line == 5);
}

TEST_CASE("typecheck: an int8 EOF compared with int is ill-typed under strict rules") {
  auto errors = check("(declare-fn getchar () int)\n(define ((f int8)) (ret (eq (call getchar) (trunc -1 int8))))").errors;
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].message.find("int8") != std::string::npos);
  CHECK(check("(declare-fn getchar () int)\n"
              "(define ((f int8)) (ret (eq (call getchar) (sext (trunc -1 int8) int))))")
            .ok());
}

TEST_CASE("typecheck: cast direction") {
  CHECK(errors_in("(set x (sext x int8))").size() >= 1);
  CHECK(errors_in("(set x (sext x int))").size() >= 1);
  CHECK(errors_in("(set w (trunc x int64))").size() >= 1);
  CHECK(errors_in("(set w (sext x int64))").empty());
  CHECK(errors_in("(set c (trunc x int8))").empty());
  CHECK(errors_in("(set d (sitofp x float64))").empty());
  CHECK(errors_in("(set x (fptosi d int))").empty());
  CHECK(errors_in("(set x (sitofp x float64))").size() == 1);
  CHECK(errors_in("(set d (sext d float64))").size() >= 1);
}

TEST_CASE("typecheck: operators") {
  CHECK(errors_in("(set x (add x 1))").empty());
  CHECK(errors_in("(set x (add x w))").size() == 1);
  CHECK(errors_in("(set d (fadd d 1.5))").empty());
  CHECK(errors_in("(set d (add d d))").size() == 1);
  CHECK(errors_in("(set x (fadd x x))").size() == 1);
  CHECK(errors_in("(set c (slt x 1))").empty());
  CHECK(errors_in("(set x (slt x 1))").size() == 1);
  CHECK(errors_in("(set x (load p))").size() == 1);
  CHECK(errors_in("(set w (load p))").empty());
  CHECK(errors_in("(set w (load w))").size() == 1);
  CHECK(errors_in("(store p w)").empty());
  CHECK(errors_in("(store p x)").size() == 1);
  CHECK(errors_in("(set p (ptr-to w))").empty());
  CHECK(errors_in("(set p (ptr-to x))").size() == 1);
  CHECK(errors_in("(set p (ptr-to nothing))").size() == 1);
  CHECK(errors_in("(set nothing 1)").size() == 1);
}

TEST_CASE("typecheck: control flow") {
  CHECK(errors_in("(if (eq x 1) (set x 2) (set x 3))").empty());
  CHECK(errors_in("(if x (set x 2))").size() == 1);
  CHECK(errors_in("(while (slt x 10) (set x (add x 1)))").empty());
  CHECK(errors_in("(while w (set x 1))").size() == 1);
  CHECK(errors_in("(ret)").empty());
  CHECK(errors_in("(ret 1)").size() == 1);
  CHECK(check("(define ((f int)) (ret))").errors.size() == 1);
  CHECK(check("(define ((f int)) (ret (sext 1 int64)))").errors.size() == 1);
}

TEST_CASE("typecheck: calls") {
  const std::string prelude = "(declare-fn g ((a int) (b (ptr int8))) int64)\n(declare-fn h () void)\n";
  CHECK(errors_in("(set w (call g x \"s\"))", prelude).empty());
  CHECK(errors_in("(set w (call g x))", prelude).size() == 1);
  CHECK(errors_in("(set w (call g w \"s\"))", prelude).size() == 1);
  CHECK(errors_in("(set x (call g x \"s\"))", prelude).size() == 1);
  CHECK(errors_in("(call h)", prelude).empty());
  CHECK(errors_in("(set x (call h))", prelude).size() == 1);
  CHECK(errors_in("(call nowhere)", prelude).size() == 1);
}

TEST_CASE("typecheck: scoping") {
  CHECK(errors_in("(declare x int)").size() == 1);
  CHECK(errors_in("(declare y int) (declare y int)").size() == 1);
  CHECK(errors_in("(block (declare y int)) (block (declare y int))").empty());
  CHECK(errors_in("(block (declare y int)) (set y 1)").size() == 1);
  CHECK(check("(define ((f void) (a int) (a int)))").errors.size() >= 1);
}

TEST_CASE("typecheck: module-level checks") {
  CHECK(check("(struct S (a int)) (struct S (b int))").errors.size() >= 1);
  CHECK(check("(struct S (a int) (a int))").errors.size() >= 1);
  CHECK(check("(struct S (a T))").errors.size() >= 1);
  CHECK(check("(struct S (a S))").errors.size() >= 1);
  CHECK(check("(struct S (next (ptr S)))").ok());
  CHECK(check("(define ((f void))) (define ((f void)))").errors.size() >= 1);
  CHECK(check("(declare-fn f () int) (declare-fn f ((a int)) int)").errors.size() >= 1);
  CHECK(check("(declare-fn f ((a int)) int) (declare-fn f ((b int)) int)").ok());
  CHECK(check("(declare-fn f ((a int)) int) (define ((f int) (a int)) (ret a))").ok());
  CHECK(check("(define ((f void) (v void)))").errors.size() >= 1);
}

TEST_CASE("typecheck collects several errors, in source order") {
  auto errors = errors_in("(set x w)\n(set w x)\n(set c d)");
  REQUIRE(errors.size() == 3);
  CHECK(errors[0].pos->line < errors[1].pos->line);
  CHECK(errors[1].pos->line < errors[2].pos->line);
  for (const auto& e : errors) CHECK(e.function == "f");
}

TEST_CASE("property: corpus programs typecheck with total annotations and no implicit conversions") {
  for (const auto& program : testing::corpus()) {
    CAPTURE(program.name);
    TypedModule m = testing::check_file(program.source);
    for (const auto& fn : m.module.functions) {
      walk_stmts(fn.body, [](const Expr& e) {
        REQUIRE(e.type.has_value());
        if (e.kind == Expr::Kind::Binary || e.kind == Expr::Kind::Compare) {
          REQUIRE(e.operands.size() == 2);
          CHECK(*e.operands[0].type == *e.operands[1].type);
        }
        for (const auto& op : e.operands) CHECK_FALSE(op.type->is_void());
      });
    }
  }
}

TEST_CASE("property: typecheck is deterministic") {
  for (const auto& program : testing::corpus()) {
    auto forms = parse_sexprs(read_file(program.source));
    auto a = typecheck(parse_module(forms));
    auto b = typecheck(parse_module(forms));
    CHECK(a.ok() == b.ok());
  }
  auto text = "(define ((f void) (x int)) (set x (sext x int64)) (set y 1) (ret 3))";
  auto a = check(text).errors;
  auto b = check(text).errors;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].to_string() == b[i].to_string());
}

TEST_CASE("strict-cast mutation over the corpus") {
  int mutants = 0;
  for (const auto& program : testing::corpus()) {
    auto forms = parse_sexprs(read_file(program.source));
    for (const auto& mutant : testing::strip_one_cast(forms)) {
      ++mutants;
      CHECK_MESSAGE(!typecheck(parse_module(mutant)).ok(), program.name << ": " << print_forms(mutant));
    }
  }
  CHECK(mutants > 10);
}

TEST_CASE("signature forms") {
  FunctionSig sig{"g", Type::void_type(), {{"count", Type::int32()}}, false, std::nullopt};
  CHECK(print_sexpr(to_sexpr(sig)) == "(declare-fn g ((count int)) void)");
  StructDef def{"Pair", {{"a", Type::int32()}, {"b", Type::ptr(Type::int8())}}, std::nullopt};
  CHECK(print_sexpr(to_sexpr(def)) == "(struct Pair (a int) (b (ptr int8)))");
  Module m = parse_module(std::vector<SExpr>{to_sexpr(sig), to_sexpr(def)});
  REQUIRE(m.externs.size() == 1);
  CHECK(m.externs[0].same_signature(sig));
  CHECK(m.structs[0].fields == def.fields);
}
