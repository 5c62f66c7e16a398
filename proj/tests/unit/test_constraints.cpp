#include <doctest.h>

#include "ctrlsum/constraints.hpp"
#include "ctrlsum/error.hpp"
#include "support.hpp"

using namespace ctrlsum;
using test::small_vocab;
using test::tok;
using test::toks;

namespace {

BinTable decade_table() {
  BinTable t;
  t.boundaries = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  t.sample_count = 10;
  return t;
}

}  // namespace

TEST_CASE("bin distance costs") {
  CHECK(length_bin_cost(5, 5) == 0.0);
  CHECK(length_bin_cost(10, 1) == doctest::Approx(0.9));
  CHECK(length_bin_cost(4, 2) == doctest::Approx(0.2));
  CHECK(abs_bin_cost(2, 2) == 0.0);
  CHECK(abs_bin_cost(1, 3) == doctest::Approx(2.0 / 3.0));
  CHECK(abs_bin_cost(3, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(max_cost(CostKind::kLengthBinDistance) == doctest::Approx(0.9));
  CHECK(max_cost(CostKind::kAbsBinDistance) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("constraint sets per task") {
  const auto length = ConstraintSet::for_task(Task::kLength);
  CHECK(length.thresholds() == std::vector<double>{0.0, 0.0});
  const auto entity = ConstraintSet::for_task(Task::kEntity);
  REQUIRE(entity.size() == 3);
  CHECK(entity.constraints[0].kind == CostKind::kQaNegF1);
  CHECK(entity.thresholds() == std::vector<double>{-0.9, 0.0, 0.0});
  const auto abs = ConstraintSet::for_task(Task::kAbstractiveness);
  CHECK(abs.constraints[2].kind == CostKind::kConjunction);
  CHECK(task_from_string(to_string(Task::kAbstractiveness)) == Task::kAbstractiveness);
  CHECK_THROWS_AS(task_from_string("summaries"), ConfigError);
}

TEST_CASE("cost vectors") {
  const auto table = decade_table();
  const CostContext ctx{&small_vocab(), &table, {}};

  const auto doc = toks("a b c d e f g h");
  CHECK(evaluate_costs(ctx, doc, toks("a b c"), toks("a b c"), ControlRequest::length(3),
                       ConstraintSet::for_task(Task::kLength)) == std::vector<double>{0.0, 0.0});

  const auto ref = toks("arsenal beat chelsea 3 1");
  const auto costs = evaluate_costs(ctx, ref, ref, ref, ControlRequest::entities({tok("arsenal"), tok("chelsea")}),
                                    ConstraintSet::for_task(Task::kEntity));
  CHECK(costs == std::vector<double>{-1.0, 0.0, 0.0});
  CHECK(violations(costs, ConstraintSet::for_task(Task::kEntity)) == std::vector<bool>{false, false, false});

  const auto copy = toks("a b c d e");
  const auto abs = evaluate_costs(ctx, copy, copy, copy, ControlRequest::abstractiveness(3),
                                  ConstraintSet::for_task(Task::kAbstractiveness));
  CHECK(abs[0] == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(evaluate_costs(ctx, doc, {}, doc, ControlRequest::length(1), ConstraintSet::for_task(Task::kLength)),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate_costs(ctx, doc, doc, doc, ControlRequest::length(1), ConstraintSet::for_task(Task::kEntity)),
                  std::invalid_argument);
}

TEST_CASE("costs stay within their ranges") {
  const auto table = decade_table();
  const CostContext ctx{&small_vocab(), &table, {}};
  const auto set = ConstraintSet::for_task(Task::kEntity);
  const auto ref = toks("E beat F . G a b .");
  const std::vector<TokenId> ents{tok("E"), tok("F"), tok("G")};
  for (const auto* summary : {"E", "E E E", "a b c", "F beat E . G a b .", "G G G G G G G"}) {
    const auto c = evaluate_costs(ctx, ref, toks(summary), ref, ControlRequest::entities(ents), set);
    CHECK(c[0] >= -1.0);
    CHECK(c[0] <= max_cost(CostKind::kQaNegF1));
    for (std::size_t i = 1; i < c.size(); ++i) {
      CHECK(c[i] >= 0.0);
      CHECK(c[i] <= max_cost(set.constraints[i].kind));
    }
  }
}

TEST_CASE("violations compare strictly against thresholds") {
  const auto one = [](CostKind k, double a) { return ConstraintSet{Task::kLength, {{k, a}}}; };
  CHECK(violations(std::vector<double>{0.0}, one(CostKind::kLengthBinDistance, 0.0)) == std::vector<bool>{false});
  CHECK(violations(std::vector<double>{-0.85}, one(CostKind::kQaNegF1, -0.9)) == std::vector<bool>{true});
  CHECK(violations(std::vector<double>{0.2, 0.0}, ConstraintSet::for_task(Task::kLength)) ==
        std::vector<bool>{true, false});
}

TEST_CASE("control requests") {
  CHECK(ControlRequest::length(4).bin() == 4);
  CHECK(ControlRequest::abstractiveness(2).task() == Task::kAbstractiveness);
  CHECK(ControlRequest::entities({tok("E")}).entity_list() == std::vector<TokenId>{tok("E")});
}

TEST_CASE("malformed requests are rejected") {
  CHECK_THROWS_AS(ControlRequest::length(0), ConfigError);
  CHECK_THROWS_AS(ControlRequest::length(11), ConfigError);
  CHECK_THROWS_AS(ControlRequest::abstractiveness(4), ConfigError);
  CHECK_THROWS_AS(ControlRequest::entities({}), ConfigError);
  CHECK_THROWS_AS(ControlRequest::length(2).entity_list(), std::logic_error);
}
