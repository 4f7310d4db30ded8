#include "clisp/bindgen.hpp"
#include "clisp/emitter.hpp"
#include "corpus.hpp"
#include "doctest.h"

using namespace clisp;

namespace {

// Lines from the frontend's IR for a probe of the fixture header.
const char* kProbeIr = R"(; ModuleID = 'probe.c'
source_filename = "probe.c"
target triple = "x86_64-pc-linux-gnu"

%struct.Pair = type { i32, i64, ptr }
%struct.Opaque = type opaque

define dso_local void @clisp_binding_probe() #0 {
  %1 = alloca ptr, align 8
  ret void
}

declare i32 @cuInit(i32 noundef) #1
declare i32 @cuCtxCreate_v2(ptr noundef, i32 noundef, i32 noundef) #1
declare void @g(i32 noundef) #1
declare i64 @f(ptr noundef, i8 noundef signext) #1
declare double @scale(float noundef, ptr noundef) #1
declare <4 x float> @vec(i32 noundef) #1
declare i32 @printf(ptr noundef, ...) #1
declare void @takes_pair(ptr noundef byval(%struct.Pair) align 8) #1
)";

// A trimmed JSON AST of the same header, in the frontend's schema.
const char* kAst = R"json({"kind":"TranslationUnitDecl","inner":[
 {"kind":"TypedefDecl","name":"CUdevice","type":{"qualType":"int"}},
 {"kind":"TypedefDecl","name":"CUcontext","type":{"qualType":"struct CUctx_st *"}},
 {"kind":"TypedefDecl","name":"CUctxAlias","type":{"qualType":"CUcontext"}},
 {"kind":"TypedefDecl","name":"CUresult","type":{"desugaredQualType":"enum cudaError_enum","qualType":"enum cudaError_enum"}},
 {"kind":"TypedefDecl","name":"Callback","type":{"qualType":"void (*)(int)"}},
 {"kind":"TypedefDecl","name":"Vec3","type":{"qualType":"float [3]"}},
 {"kind":"TypedefDecl","name":"Nothing","type":{"qualType":"void"}},
 {"kind":"TypedefDecl","name":"U64","type":{"qualType":"unsigned long long"}},
 {"kind":"TypedefDecl","name":"Small","type":{"qualType":"short"}},
 {"kind":"RecordDecl","name":"Pair","tagUsed":"struct","completeDefinition":true,"inner":[
   {"kind":"FieldDecl","name":"first","type":{"qualType":"int"}},
   {"kind":"FieldDecl","name":"second","type":{"qualType":"long"}},
   {"kind":"FieldDecl","name":"name","type":{"qualType":"char *"}}]},
 {"kind":"FunctionDecl","name":"cuInit","type":{"qualType":"CUresult (unsigned int)"},"inner":[
   {"kind":"ParmVarDecl","name":"Flags","type":{"qualType":"unsigned int"}}]},
 {"kind":"FunctionDecl","name":"cuCtxCreate_v2","type":{"qualType":"CUresult (CUcontext *, unsigned int, CUdevice)"},"inner":[
   {"kind":"ParmVarDecl","name":"pctx","type":{"qualType":"CUcontext *"}},
   {"kind":"ParmVarDecl","name":"flags","type":{"qualType":"unsigned int"}},
   {"kind":"ParmVarDecl","name":"dev","type":{"desugaredQualType":"int","qualType":"CUdevice"}}]},
 {"kind":"FunctionDecl","name":"g","type":{"qualType":"void (int)"},"inner":[
   {"kind":"ParmVarDecl","name":"count","type":{"qualType":"int"}}]},
 {"kind":"FunctionDecl","name":"f","type":{"qualType":"long (void *, char)"},"inner":[
   {"kind":"ParmVarDecl","type":{"qualType":"void *"}},
   {"kind":"ParmVarDecl","type":{"qualType":"char"}}]},
 {"kind":"FunctionDecl","name":"scale","type":{"qualType":"double (float, struct Pair *)"},"inner":[
   {"kind":"ParmVarDecl","name":"factor","type":{"qualType":"float"}},
   {"kind":"ParmVarDecl","name":"pair","type":{"qualType":"struct Pair *"}}]}
]})json";

BindRequest request(std::vector<std::string> functions, std::vector<std::string> structs = {},
                    std::vector<std::string> typedefs = {}) {
  return BindRequest{{"fixture.h"}, std::move(functions), std::move(structs), std::move(typedefs)};
}

std::string sig_text(const FunctionSig& sig) { return print_sexpr(to_sexpr(sig)); }

void check_bindgen_error(const std::function<void()>& fn, BindgenError::Stage stage, const std::string& fragment) {
  try {
    fn();
    FAIL("expected BindgenError containing " << fragment);
  } catch (const BindgenError& e) {
    CHECK(e.stage() == stage);
    CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, std::string(e.what()));
  }
}

}  // namespace

TEST_CASE("generate_probe") {
  auto probe = generate_probe(BindRequest{{"cuda_like.h"}, {"cuInit"}, {}, {"CUcontext"}});
  CHECK(probe.find("#include <cuda_like.h>") != std::string::npos);
  CHECK(probe.find("(void *)&cuInit;") != std::string::npos);
  CHECK(probe.find("volatile") != std::string::npos);
  CHECK(probe.find("CUcontext clisp_typedef_0;") != std::string::npos);

  auto fixture = (testing::fixture_dir() / "opaque_handles.h").string();
  auto local = generate_probe(BindRequest{{fixture}, {}, {"Pair"}, {}});
  CHECK(local.find("#include \"" + fixture + "\"") != std::string::npos);
  CHECK(local.find("struct Pair clisp_struct_0;") != std::string::npos);

  auto bare = generate_probe(BindRequest{{"h.h"}, {}, {}, {}});
  CHECK(bare.find("clisp_fn_") == std::string::npos);
  CHECK(bare.find("clisp_struct_") == std::string::npos);
  CHECK(bare.find("clisp_typedef_") == std::string::npos);

  auto dup = generate_probe(BindRequest{{"h.h", "h.h"}, {"g", "g"}, {}, {"T", "T"}});
  CHECK(dup.find("clisp_fn_1") == std::string::npos);
  CHECK(dup.find("clisp_typedef_1") == std::string::npos);
  CHECK(dup.find("#include <h.h>") == dup.rfind("#include <h.h>"));
}

TEST_CASE("parse_ir_signatures: IR types map back") {
  auto ir = parse_ir_signatures(kProbeIr, request({"cuInit", "f", "g", "scale"}, {"Pair", "Opaque"}));
  REQUIRE(ir.functions.size() == 4);
  CHECK(sig_text(ir.functions[0]) == "(declare-fn cuInit ((arg0 int)) int)");
  CHECK(sig_text(ir.functions[1]) == "(declare-fn f ((arg0 (ptr void)) (arg1 int8)) int64)");
  CHECK(sig_text(ir.functions[2]) == "(declare-fn g ((arg0 int)) void)");
  CHECK(sig_text(ir.functions[3]) == "(declare-fn scale ((arg0 float32) (arg1 (ptr void))) float64)");
  REQUIRE(ir.structs.size() == 2);
  CHECK(print_sexpr(to_sexpr(ir.structs[0])) == "(struct Pair (field0 int) (field1 int64) (field2 (ptr void)))");
  CHECK(ir.structs[1].fields.empty());
  CHECK(ir_declaration(ir.raw[1]) == "declare i64 @f(ptr, i8)");
}

TEST_CASE("parse_ir_signatures: errors") {
  check_bindgen_error([] { parse_ir_signatures(kProbeIr, request({"nope", "cuInit", "nada"}, {"Gone"})); },
                      BindgenError::Stage::IR, "nope, nada, struct Gone");
  check_bindgen_error([] { parse_ir_signatures(kProbeIr, request({"vec"})); }, BindgenError::Stage::IR,
                      "<4 x float>");
  check_bindgen_error([] { parse_ir_signatures(kProbeIr, request({"printf"})); }, BindgenError::Stage::IR,
                      "variadic");
  check_bindgen_error([] { parse_ir_signatures(kProbeIr, request({"takes_pair"})); }, BindgenError::Stage::IR,
                      "by value");
}

TEST_CASE("parse_ast_metadata: aliases and parameter names") {
  json ast = json::parse(kAst);
  auto meta = parse_ast_metadata(ast, request({"g", "f", "cuCtxCreate_v2"}, {}, {"CUcontext", "CUdevice", "CUresult",
                                                                              "CUctxAlias", "U64"}));
  REQUIRE(meta.aliases.size() == 5);
  CHECK(meta.aliases[0] == std::pair<std::string, Type>{"CUcontext", Type::ptr(Type::void_type())});
  CHECK(meta.aliases[1].second == Type::int32());
  CHECK(meta.aliases[2].second == Type::int32());
  CHECK(meta.aliases[3].second == Type::ptr(Type::void_type()));
  CHECK(meta.aliases[4].second == Type::int64());
  CHECK(meta.functions.at("g").param_names == std::vector<std::string>{"count"});
  CHECK(meta.functions.at("f").param_names == std::vector<std::string>{"", ""});
  const auto& create = meta.functions.at("cuCtxCreate_v2");
  CHECK(create.param_names == std::vector<std::string>{"pctx", "flags", "dev"});
  CHECK(create.param_types[0] == Type::ptr(Type::ptr(Type::void_type())));
  CHECK(create.return_type == Type::int32());
}

TEST_CASE("parse_ast_metadata: errors") {
  json ast = json::parse(kAst);
  check_bindgen_error([&] { parse_ast_metadata(ast, request({}, {}, {"Missing"})); }, BindgenError::Stage::AST,
                      "Missing");
  check_bindgen_error([&] { parse_ast_metadata(ast, request({}, {}, {"Callback"})); }, BindgenError::Stage::AST,
                      "function pointer");
  check_bindgen_error([&] { parse_ast_metadata(ast, request({}, {}, {"Vec3"})); }, BindgenError::Stage::AST,
                      "array");
  check_bindgen_error([&] { parse_ast_metadata(ast, request({}, {}, {"Nothing"})); }, BindgenError::Stage::AST,
                      "void");
  check_bindgen_error([&] { parse_ast_metadata(ast, request({}, {}, {"Small"})); }, BindgenError::Stage::AST,
                      "16-bit");
  check_bindgen_error([&] { parse_ast_metadata(json::array(), request({})); }, BindgenError::Stage::AST, "object");
}

TEST_CASE("resolve_ctype") {
  json ast = json::parse(kAst);
  auto req = request({}, {"Pair"});
  CHECK(resolve_ctype(ast, "const char *", req) == Type::ptr(Type::int8()));
  CHECK(resolve_ctype(ast, "CUcontext *", req) == Type::ptr(Type::ptr(Type::void_type())));
  CHECK(resolve_ctype(ast, "struct Pair *", req) == Type::ptr(Type::named_struct("Pair")));
  CHECK(resolve_ctype(ast, "struct Other *", req) == Type::ptr(Type::void_type()));
  CHECK(resolve_ctype(ast, "unsigned long", req) == Type::int64());
  CHECK(resolve_ctype(ast, "signed char", req) == Type::int8());
  CHECK(resolve_ctype(ast, "double", req) == Type::float64());
  CHECK(resolve_ctype(ast, "void **", req) == Type::ptr(Type::ptr(Type::void_type())));
  CHECK_THROWS_AS(resolve_ctype(ast, "struct Other", req), BindgenError);
  CHECK_THROWS_AS(resolve_ctype(ast, "union U *", req), BindgenError);
  CHECK_THROWS_AS(resolve_ctype(ast, "long double", req), BindgenError);
  CHECK_THROWS_AS(resolve_ctype(ast, "_Bool", req), BindgenError);
}

TEST_CASE("combine: IR types, AST names, refined pointees") {
  auto req = request({"cuCtxCreate_v2", "f", "g", "scale"}, {"Pair"}, {"CUcontext"});
  auto binding = combine(parse_ir_signatures(kProbeIr, req), parse_ast_metadata(json::parse(kAst), req), req);
  REQUIRE(binding.signatures.size() == 4);
  CHECK(sig_text(binding.signatures[0]) == "(declare-fn cuCtxCreate_v2 ((pctx (ptr (ptr void))) (flags int) (dev int)) int)");
  CHECK(sig_text(binding.signatures[1]) == "(declare-fn f ((arg0 (ptr void)) (arg1 int8)) int64)");
  CHECK(sig_text(binding.signatures[2]) == "(declare-fn g ((count int)) void)");
  CHECK(sig_text(binding.signatures[3]) == "(declare-fn scale ((factor float32) (pair (ptr Pair))) float64)");
  REQUIRE(binding.struct_defs.size() == 1);
  CHECK(print_sexpr(to_sexpr(binding.struct_defs[0])) == "(struct Pair (first int) (second int64) (name (ptr int8)))");
  REQUIRE(binding.aliases.size() == 1);

  json forms = binding_forms(binding);
  REQUIRE(forms.size() == 5);
  CHECK(forms[0][0] == "struct");
  for (std::size_t i = 1; i < forms.size(); ++i) CHECK(forms[i][0] == "declare-fn");
}

TEST_CASE("combine: arity disagreement between IR and AST is an error") {
  auto req = request({"g"});
  auto ir = parse_ir_signatures(kProbeIr, req);
  AstMetadata meta;
  meta.functions["g"].param_names = {"a", "b"};
  meta.functions["g"].param_types = {std::nullopt, std::nullopt};
  CHECK_THROWS_AS(combine(ir, meta, req), BindgenError);
}

TEST_CASE("soundness hook: generated signatures re-emit the probe declaration") {
  auto req = request({"cuInit", "cuCtxCreate_v2", "f", "g", "scale"}, {"Pair"});
  auto binding = combine(parse_ir_signatures(kProbeIr, req), parse_ast_metadata(json::parse(kAst), req), req);
  for (std::size_t i = 0; i < binding.signatures.size(); ++i) {
    const FunctionSig& sig = binding.signatures[i];
    std::vector<SExpr> forms;
    for (const auto& def : binding.struct_defs) forms.push_back(to_sexpr(def));
    forms.push_back(to_sexpr(sig));
    // A caller with correctly typed arguments.
    SExpr::List call{SExpr::symbol("call"), SExpr::symbol(sig.name)};
    SExpr::List params;
    for (const auto& p : sig.params) {
      call.push_back(SExpr::symbol(p.name));
      params.push_back(SExpr::list({SExpr::symbol(p.name), to_sexpr(p.type)}));
    }
    SExpr::List head{SExpr::list({SExpr::symbol("caller"), SExpr::symbol("void")})};
    for (auto& p : params) head.push_back(p);
    forms.push_back(SExpr::list({SExpr::symbol("define"), SExpr::list(head), SExpr::list(call)}));

    CheckResult r = typecheck(parse_module(forms));
    REQUIRE_MESSAGE(r.ok(), print_forms(forms));
    auto ir = emit(*r.module).text;
    CHECK_MESSAGE(ir.find("\n" + ir_declaration(binding.probe_declarations[i]) + "\n") != std::string::npos, ir);
  }
}

TEST_CASE("request_from_macro_args") {
  auto req = request_from_macro_args(json::parse(R"([["a.h","b.h"],["cuInit"],[],["CUcontext"]])"));
  CHECK(req.headers == std::vector<std::string>{"a.h", "b.h"});
  CHECK(req.functions == std::vector<std::string>{"cuInit"});
  CHECK(req.structs.empty());
  CHECK(req.typedefs == std::vector<std::string>{"CUcontext"});
  CHECK_THROWS_AS(request_from_macro_args(json::parse(R"([["a.h"],[]])")), BindgenError);
  CHECK_THROWS_AS(request_from_macro_args(json::parse(R"([[],[],[],[]])")), BindgenError);
  CHECK_THROWS_AS(request_from_macro_args(json::parse(R"([["a.h"],[1],[],[]])")), BindgenError);
}

TEST_CASE("live: fixture header through the frontend") {
  auto cc = testing::live_compiler();
  if (!cc) {
    MESSAGE("no C frontend; live bindgen skipped");
    return;
  }
  Toolchain tc(*cc);
  auto header = (testing::fixture_dir() / "opaque_handles.h").string();
  BindRequest req{{header}, {"cuInit", "g", "f", "cuCtxCreate_v2"}, {}, {"CUcontext", "CUmodule"}};
  Binding a = clisp::bind(req, tc, {});
  Binding b = clisp::bind(req, tc, {});
  CHECK(binding_forms(a) == binding_forms(b));
  REQUIRE(a.signatures.size() == 4);
  CHECK(sig_text(a.signatures[1]) == "(declare-fn g ((count int)) void)");
  CHECK(sig_text(a.signatures[2]) == "(declare-fn f ((arg0 (ptr void)) (arg1 int8)) int64)");
  CHECK(a.aliases[0].second == Type::ptr(Type::void_type()));

  check_bindgen_error([&] { clisp::bind(BindRequest{{header}, {"missing_fn"}, {}, {}}, tc, {}); },
                      BindgenError::Stage::Frontend, "missing_fn");
  Toolchain absent("/nonexistent/cc");
  CHECK_THROWS_AS(clisp::bind(req, absent, {}), ToolError);
}

TEST_CASE("BindgenResolver registers aliases for later variable macros") {
  auto cc = testing::live_compiler();
  if (!cc) {
    MESSAGE("no C frontend; skipped");
    return;
  }
  Toolchain tc(*cc);
  BindgenResolver resolver(tc, {testing::fixture_dir().string()});
  CHECK_THROWS_AS(resolver.resolve_variable("CUmodule"), MacroError);
  json program = json::parse(R"([["unquote-splicing",["include",["opaque_handles.h"],["cuModuleLoad"],[],["CUmodule"]]],
                                 ["define",[["h","void"],["m",["unquote","CUmodule"]]]]])");
  json out = expand(program, resolver);
  CHECK(out == json::parse(R"([["declare-fn","cuModuleLoad",[["module",["ptr",["ptr","void"]]],["fname",["ptr","int8"]]],"int"],
                               ["define",[["h","void"],["m",["ptr","void"]]]]])"));
}
