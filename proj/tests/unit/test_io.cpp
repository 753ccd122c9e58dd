#include "locsched/io.hpp"
#include "locsched/types.hpp"

#include <doctest.h>

using namespace locsched;

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("provenance block") {
  nlohmann::json p = make_provenance("abstract");
  add_input(p, "scenario", "a.yaml", "abc");
  CHECK(p["tool"] == "locsched");
  CHECK(p["inputs"]["scenario"]["sha256"] == sha256_hex("abc"));
  const std::string pre = csv_preamble(p);
  CHECK(pre.rfind("# provenance: {", 0) == 0);
  CHECK(pre.back() == '\n');
}

TEST_CASE("file errors") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/file"), InvalidInput);
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/file", "x"), InvalidInput);
}
