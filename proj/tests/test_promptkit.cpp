#include <doctest.h>

#include <fstream>
#include <sstream>

#include "facade/promptkit.hpp"
#include "facade/rulebase.hpp"

using namespace facade;

namespace {

const PromptRegistry& registry() {
  static PromptRegistry reg = PromptRegistry::load(FACADE_PROMPTS_DIR);
  return reg;
}

std::map<PromptId, std::string> sample_raw_texts() {
  return {{PromptId::P1, "age answer"},
          {PromptId::P2, "type answer"},
          {PromptId::P3, "heating answer"},
          {PromptId::P4, "window answer"},
          {PromptId::P5, "lighting answer"}};
}

}  // namespace

TEST_CASE("rendered P1-P5 equal the stored templates byte for byte") {
  for (PromptId id : {PromptId::P1, PromptId::P2, PromptId::P3, PromptId::P4,
                      PromptId::P5, PromptId::X2}) {
    auto payload = registry().render(id, {"https://example.org/a.jpg"});
    CHECK(payload.text == registry().template_text(id));
    std::ifstream in(std::filesystem::path(FACADE_PROMPTS_DIR) /
                         (std::string(to_string(id)) + ".txt"),
                     std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(payload.text == buf.str());
  }
}

TEST_CASE("template contents match the published wording") {
  auto p1 = registry().render(PromptId::P1, {"a", "b", "c"});
  CHECK(p1.text.starts_with("The images below belong to the same apartment"));
  CHECK(p1.text.find("What is the age of this apartment?") != std::string::npos);
  CHECK(p1.images.size() == 3);

  auto p3 = registry().render(PromptId::P3, {"a", "b"});
  CHECK(p3.text.find("\"Air vent\": \"Y/N\"") != std::string::npos);
}

TEST_CASE("context substitution is total") {
  auto payload =
      registry().render(PromptId::P6, {"img"}, std::string("CONTEXT BLOCK"));
  CHECK(payload.text.find(kContextPlaceholder) == std::string::npos);
  CHECK(payload.text.find("CONTEXT BLOCK") != std::string::npos);
}

TEST_CASE("context preconditions") {
  CHECK_THROWS_AS(registry().render(PromptId::P6, {"img"}), MissingContext);
  CHECK_THROWS_AS(registry().render(PromptId::P7, {"img"}), MissingContext);
  CHECK_THROWS_AS(registry().render(PromptId::X1, {}), MissingContext);
  CHECK_THROWS_AS(registry().render(PromptId::P2, {"img"}, std::string("x")),
                  UnexpectedContext);
}

TEST_CASE("stage_summary layout") {
  auto summary = stage_summary(sample_raw_texts(), HeatingType::WarmAir,
                               EnergySource::Community);
  CHECK(!summary.empty());
  int headers = 0;
  for (size_t pos = 0; (pos = summary.find("### ", pos)) != std::string::npos;
       ++pos) {
    ++headers;
  }
  CHECK(headers == 6);  // five stages plus the derived-heating block
  CHECK(summary.find("Main heating: warm air; Energy source: community") !=
        std::string::npos);

  // each stage text appears verbatim exactly once
  for (const auto& [id, text] : sample_raw_texts()) {
    size_t first = summary.find(text);
    REQUIRE(first != std::string::npos);
    CHECK(summary.find(text, first + 1) == std::string::npos);
  }
}

TEST_CASE("stage_summary renders unknown heating") {
  auto summary = stage_summary(sample_raw_texts(), HeatingType::Unknown,
                               EnergySource::Unknown);
  CHECK(summary.find("Main heating: unknown; Energy source: unknown") !=
        std::string::npos);
}

TEST_CASE("stage_summary rejects missing stages") {
  auto raws = sample_raw_texts();
  raws.erase(PromptId::P4);
  CHECK_THROWS_AS(
      stage_summary(raws, HeatingType::WarmAir, EnergySource::Community),
      IncompleteStages);
}

TEST_CASE("prompt id helpers") {
  CHECK(prompt_id_from_string("P3") == PromptId::P3);
  CHECK(!prompt_id_from_string("P9"));
  CHECK(prompt_is_verbatim(PromptId::P6));
  CHECK(!prompt_is_verbatim(PromptId::X1));
  CHECK(!prompt_takes_images(PromptId::X1));
  CHECK(prompt_takes_context(PromptId::X1));
}
