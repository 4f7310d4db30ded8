#include "clisp/process.hpp"
#include "corpus.hpp"
#include "doctest.h"

using namespace clisp;

namespace {

ProcessResult clispc(std::vector<std::string> args, std::string_view input = {}) {
  args.insert(args.begin(), testing::clispc_path().string());
  return run_process(args, input);
}

std::string corpus(const std::string& name) { return (testing::corpus_dir() / name).string(); }

std::vector<std::string> with_host(std::vector<std::string> args, const std::string& module = "macros.py") {
  args.insert(args.end(), {"--macros", module, "--macro-host", testing::fake_host_path().string()});
  return args;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("s2json") {
  auto r = clispc({"s2json", corpus("muladd.cl")});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.starts_with(R"([["define",[["muladd","void"],)"));
  CHECK(r.out == read_file(testing::golden_dir() / "cli" / "muladd.json"));

  r = clispc({"s2json", "-"}, "");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "[]\n");

  r = clispc({"s2json", "-"}, "(define ((f int))\n  (ret (add 1 2))");
  CHECK(r.exit_code == 2);
  CHECK(contains(r.err, "1:1"));
}

TEST_CASE("json2s") {
  auto r = clispc({"json2s", "-"}, R"([["set","var",["add","var",45]]])");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "(set var (add var 45))\n");

  r = clispc({"json2s", "-"}, "[]");
  CHECK(r.exit_code == 0);
  CHECK(r.out.empty());

  CHECK(clispc({"json2s", "-"}, R"({"a":1})").exit_code == 2);
  CHECK(clispc({"json2s", "-"}, R"([[true]])").exit_code == 2);
  CHECK(clispc({"json2s", "-"}, "[").exit_code == 2);
}

TEST_CASE("json2s inverts s2json over the corpus") {
  for (const auto& program : testing::corpus()) {
    auto json1 = clispc({"s2json", program.source.string()});
    REQUIRE(json1.exit_code == 0);
    auto text = clispc({"json2s", "-"}, json1.out);
    REQUIRE(text.exit_code == 0);
    CHECK_MESSAGE(clispc({"s2json", "-"}, text.out).out == json1.out, program.name);
  }
}

TEST_CASE("expand through a macro host") {
  auto r = clispc(with_host({"expand", "-"}), R"([["eq",["call","getchar"],["unquote","EOF"]]])");
  CHECK(r.exit_code == 0);
  CHECK(r.out == R"([["eq",["call","getchar"],["trunc",-1,"int8"]]])"
                 "\n");

  r = clispc(with_host({"expand", "-", "--format", "sexpr"}), "(eq (call getchar) ,EOF)");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "(eq (call getchar) (trunc -1 int8))\n");

  r = clispc(with_host({"expand", "-"}), "(block ,@(declare_multiple (ch i) int) (set i 0))");
  CHECK(r.out == "(block (declare ch int) (declare i int) (set i 0))\n");
}

TEST_CASE("expand: a program without macros passes through byte for byte") {
  const std::string spaced = "[ [\"set\", \"var\",   1] ]\n";
  auto r = clispc({"expand", "-"}, spaced);
  CHECK(r.exit_code == 0);
  CHECK(r.out == spaced);
  const std::string source = read_file(testing::corpus_dir() / "muladd.cl");
  CHECK(clispc({"expand", corpus("muladd.cl")}).out == source);
}

TEST_CASE("expand: exit codes tell resolution failures from host failures") {
  auto r = clispc(with_host({"expand", "-"}), R"([["unquote","NOPE"]])");
  CHECK(r.exit_code == 3);
  CHECK(contains(r.err, "NOPE"));
  CHECK(clispc(with_host({"expand", "-"}), R"([["unquote",["explode"]]])").exit_code == 3);
  CHECK(clispc({"expand", "-"}, R"([["unquote","EOF"]])").exit_code == 3);
  CHECK(clispc(with_host({"expand", "-"}, "m.crash"), R"([["unquote","EOF"]])").exit_code == 5);
  CHECK(clispc(with_host({"expand", "-"}, "m.garbage"), R"([["unquote","EOF"]])").exit_code == 5);
  auto missing = clispc({"expand", "-", "--macros", "m.py", "--macro-host", "/nonexistent/host"}, R"([["unquote","EOF"]])");
  CHECK(missing.exit_code == 5);
  CHECK(contains(missing.err, "--macro-host"));
}

TEST_CASE("expand --dry-run lists macros without a host") {
  auto r = clispc({"expand", "-", "--dry-run"}, "(f ,EOF\n   ,@(declare_multiple (a) int))");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "1:4\tvariable\tEOF\n2:4\tsplice-call\tdeclare_multiple\t[[\"a\"],\"int\"]\n");
}

TEST_CASE("compile") {
  auto r = clispc({"compile", corpus("muladd.cl")});
  CHECK(r.exit_code == 0);
  CHECK(r.out == read_file(testing::golden_dir() / "cli" / "muladd.ll"));

  r = clispc({"compile", "-"}, "(define ((f int64) (a int) (b int64))\n  (ret (add a b)))");
  CHECK(r.exit_code == 4);
  int lines = 0;
  for (char c : r.err) lines += c == '\n';
  CHECK(lines == 2);
  CHECK(contains(r.err, "<stdin>:2:"));
  CHECK(contains(r.err, "1 type error"));

  r = clispc({"compile", "-", "--entry", "f"}, "(define ((f void)))");
  CHECK(r.exit_code == 4);
  CHECK(contains(r.err, "entry function must return int"));

  r = clispc({"compile", "-", "--entry", "f"}, "(define ((f int)) (ret 3))");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "define i32 @main()"));

  CHECK(clispc({"compile", "/nonexistent/x.cl"}).exit_code == 1);
  CHECK(clispc({"frobnicate"}).exit_code == 1);
}

TEST_CASE("pipe composability: s2json | expand | compile") {
  std::string source = read_file(testing::corpus_dir() / "eof.cl");
  const std::string eof_form = "(sext (trunc -1 int8) int)";
  auto at = source.find(eof_form);
  REQUIRE(at != std::string::npos);
  std::string with_macro = source;
  with_macro.replace(at, eof_form.size(), ",EOF");

  auto json1 = clispc({"s2json", "-"}, with_macro);
  REQUIRE(json1.exit_code == 0);
  auto expanded = clispc(with_host({"expand", "-"}, "m.typed"), json1.out);
  REQUIRE(expanded.exit_code == 0);
  auto piped = clispc({"compile", "-"}, expanded.out);
  REQUIRE(piped.exit_code == 0);
  auto direct = clispc({"compile", corpus("eof.cl")});
  CHECK(piped.out == direct.out);
}

TEST_CASE("run") {
  auto cc = testing::live_compiler();
  if (!cc) {
    MESSAGE("no C compiler; run checks skipped");
    return;
  }
  auto r = clispc({"run", corpus("driver22.cl"), "--toolchain", cc->string()});
  CHECK(r.exit_code == 22);
  CHECK(r.out.empty());

  r = clispc({"run", corpus("muladd.cl"), "--toolchain", cc->string(), "--link", corpus("muladd.support.c")});
  CHECK(r.exit_code == 22);
  CHECK(r.out == "22\n");
  CHECK(clispc({"run", corpus("muladd.cl"), "--toolchain", cc->string()}).exit_code == 4);

  r = clispc({"run", corpus("driver22.cl"), "--toolchain", "/nonexistent/clang"});
  CHECK(r.exit_code == 5);
  CHECK(contains(r.err, "--toolchain"));

  ScratchDir scratch("clisp-test");
  auto fake = scratch.path() / "fakecc";
  write_file(fake,
             "#!/bin/sh\n"
             "for a in \"$@\"; do [ \"$a\" = -cc1 ] && { echo 'error: broken' >&2; exit 1; }; done\n"
             "exit 0\n");
  std::filesystem::permissions(fake, std::filesystem::perms::owner_all);
  r = clispc({"run", corpus("driver22.cl"), "--toolchain", fake.string()});
  CHECK(r.exit_code == 6);
  auto kept = r.err.find("kept ");
  REQUIRE(kept != std::string::npos);
  std::filesystem::path ll = r.err.substr(kept + 5, r.err.find('\n', kept) - kept - 5);
  CHECK(std::filesystem::exists(ll));
  std::filesystem::remove_all(ll.parent_path());
}

TEST_CASE("determinism") {
  auto a = clispc({"compile", corpus("structs.cl")});
  auto b = clispc({"compile", corpus("structs.cl")});
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
}
