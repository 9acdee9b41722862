#include <doctest.h>

#include <string>

#include "doa/document.hpp"
#include "doa/reference_example.hpp"
#include "support/random_operators.hpp"

using namespace doa;

namespace {

const char* kExample = R"doc({
  "n_dims": 2, "m": 1, "grid": [8, 8],
  "a0": [["lambda"]],
  "terms": [
    {"level": 1, "a": [["1", "sqrt(2)*sin(2*pi*k1)"]], "b": [["1"], ["sqrt(2)*sin(2*pi*k1)"]]},
    {"level": 2, "a": [["1"]], "b": [["1"]]}
  ]
})doc";

std::string error_of(const std::string& text) {
  try {
    parse_document(text);
  } catch (const DocumentError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("example document builds the shifted operator") {
  OperatorDocument doc = parse_document(kExample);
  CHECK(doc.uses_lambda());
  CHECK(doc.grid == std::vector<std::size_t>{8, 8});
  GridSpec spec({8, 8});
  DefectOperator expected = shifted(example::build_operator(spec, parse(example::kDefaultProfile)), 3.0);
  CHECK(equal_as_map(build_operator(doc, Complex(3.0)), expected, 1e-14));
  CHECK_THROWS_AS(build_operator(doc), DocumentError);
}

TEST_CASE("serialize round trip") {
  OperatorDocument doc = parse_document(kExample);
  std::string text = serialize_document(doc);
  OperatorDocument again = parse_document(text);
  CHECK(serialize_document(again) == text);
  CHECK(equal_as_map(build_operator(doc, Complex(0.5, 1.0)), build_operator(again, Complex(0.5, 1.0)), 0.0));
}

TEST_CASE("schema errors") {
  CHECK(error_of("{").find("line") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 2, "m": 1, "grid": [8], "a0": [["1"]], "terms": []})").find("grid") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [4], "a0": [["k2"]], "terms": []})").find("a0") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 2, "grid": [4], "a0": [["1"]], "terms": []})").find("a0") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [4], "a0": [["1"]], "terms": [], "extra": 1})").find("extra") !=
        std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [4], "a0": [["1"]],
                     "terms": [{"level": 1, "a": [["1"]], "b": [["1"]]}, {"level": 1, "a": [["1"]], "b": [["1"]]}]})")
            .find("level") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [4], "a0": [["1"]],
                     "terms": [{"level": 2, "a": [["1"]], "b": [["1"]]}]})")
            .find("level") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [4], "a0": [["1"]],
                     "terms": [{"level": 1, "a": [["1", "2"]], "b": [["1"]]}]})")
            .find("terms") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [4], "a0": [["1 +"]], "terms": []})").find("a0") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [4], "a0": [[1]], "terms": []})").find("a0") != std::string::npos);
  CHECK(error_of(R"({"n_dims": 1, "m": 1, "grid": [0], "a0": [["1"]], "terms": []})").find("grid") != std::string::npos);
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_document("/nonexistent/operator.json"), DocumentError); }
