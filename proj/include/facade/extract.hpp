#pragma once

// Tolerant parsers for the free-text answers coming back from each prompt.
// The prompts all instruct "explanation first, then the answer", so for the
// option-list prompts the LAST occurrence of any option token (either the
// "(n)" form or the canonical label) wins. Failures produce a diagnostic
// instead of a guess.

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "facade/core.hpp"
#include "facade/promptkit.hpp"

namespace facade {

enum class ParseReason {
  NoAnswerFound,
  AmbiguousAnswer,
  MalformedJson,
  MissingField,
  OutOfRange,
};

inline std::string_view to_string(ParseReason reason) {
  switch (reason) {
    case ParseReason::NoAnswerFound: return "NoAnswerFound";
    case ParseReason::AmbiguousAnswer: return "AmbiguousAnswer";
    case ParseReason::MalformedJson: return "MalformedJson";
    case ParseReason::MissingField: return "MissingField";
    case ParseReason::OutOfRange: return "OutOfRange";
  }
  return "?";
}

inline std::optional<ParseReason> parse_reason_from_string(std::string_view s) {
  for (ParseReason r :
       {ParseReason::NoAnswerFound, ParseReason::AmbiguousAnswer,
        ParseReason::MalformedJson, ParseReason::MissingField,
        ParseReason::OutOfRange}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

struct ParseDiagnostic {
  PromptId prompt_id;
  ParseReason reason;
  std::string snippet;  // at most 200 chars of the offending text

  bool operator==(const ParseDiagnostic&) const = default;
};

template <class T>
struct Parsed {
  std::optional<T> value;
  std::optional<ParseDiagnostic> diag;

  bool ok() const { return value.has_value(); }
};

namespace detail {

inline std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

inline std::string snippet_of(std::string_view text) {
  return std::string(text.substr(0, 200));
}

template <class T>
struct Option {
  std::string_view token;  // "(n)" form
  std::string_view label;  // canonical label
  T value;
};

// Last occurrence by start position wins; on a tie the longer match wins.
template <class T>
std::optional<T> last_option_match(std::string_view raw,
                                   const std::vector<Option<T>>& options) {
  std::string text = lowercase(raw);
  std::optional<T> best;
  size_t best_pos = 0;
  size_t best_len = 0;
  auto consider = [&](std::string_view needle, const T& value) {
    if (needle.empty()) return;
    std::string want = lowercase(needle);
    size_t pos = text.rfind(want);
    if (pos == std::string::npos) return;
    if (!best || pos > best_pos || (pos == best_pos && want.size() > best_len)) {
      best = value;
      best_pos = pos;
      best_len = want.size();
    }
  };
  for (const auto& opt : options) {
    consider(opt.token, opt.value);
    consider(opt.label, opt.value);
  }
  return best;
}

template <class T>
Parsed<T> option_parse(PromptId id, std::string_view text,
                       const std::vector<Option<T>>& options) {
  if (auto v = last_option_match(text, options)) return {{*v}, std::nullopt};
  return {std::nullopt,
          ParseDiagnostic{id, ParseReason::NoAnswerFound, snippet_of(text)}};
}

}  // namespace detail

inline Parsed<AgeBand> parse_age_band(std::string_view text) {
  static const std::vector<detail::Option<AgeBand>> options = {
      {"(1)", "before 1900", AgeBand::Before1900},
      {"(2)", "1900-1930", AgeBand::Y1900_1930},
      {"(3)", "1930-1950", AgeBand::Y1930_1950},
      {"(4)", "1950-1970", AgeBand::Y1950_1970},
      {"(5)", "1970-1990", AgeBand::Y1970_1990},
      {"(6)", "1990-2020", AgeBand::Y1990_2020},
      {"(7)", "2020-now", AgeBand::Y2020_Now},
  };
  return detail::option_parse(PromptId::P1, text, options);
}

inline Parsed<BuildingType> parse_building_type(std::string_view text) {
  static const std::vector<detail::Option<BuildingType>> options = {
      {"(1)", "single-family detached", BuildingType::SingleFamilyDetached},
      {"(2)", "single-family attached", BuildingType::SingleFamilyAttached},
      {"(3)", "apartments in buildings with 2-4 units", BuildingType::Units2to4},
      {"(4)", "apartments in buildings with 5 or more units",
       BuildingType::Units5Plus},
      {"(5)", "mobile home", BuildingType::MobileHome},
  };
  return detail::option_parse(PromptId::P2, text, options);
}

inline Parsed<WindowType> parse_window_type(std::string_view text) {
  static const std::vector<detail::Option<WindowType>> options = {
      {"(1)", "single glazed", WindowType::SingleGlazed},
      {"(2)", "double glazed", WindowType::DoubleGlazed},
      {"(3)", "high efficiency double or triple glazed",
       WindowType::HighEfficiencyDoubleOrTriple},
  };
  return detail::option_parse(PromptId::P4, text, options);
}

inline Parsed<LightingPercent> parse_lighting(std::string_view text) {
  static const std::vector<detail::Option<double>> options = {
      {"(1)", "no low energy lighting", 0.0},
      {"(2)", "low energy in 20%", 20.0},
      {"(3)", "low energy in 40%", 40.0},
      {"(4)", "low energy in 60%", 60.0},
      {"(5)", "low energy in 80%", 80.0},
      {"(6)", "low energy in 100%", 100.0},
  };
  if (auto v = detail::last_option_match(text, options)) {
    return {{LightingPercent{*v}}, std::nullopt};
  }
  return {std::nullopt, ParseDiagnostic{PromptId::P5, ParseReason::NoAnswerFound,
                                        detail::snippet_of(text)}};
}

// The heating answer is a JSON object with five Y/N fields, usually wrapped
// in prose and sometimes in a markdown code fence.
inline Parsed<HeatingObservation> parse_heating_observation(
    std::string_view text) {
  auto fail = [&](ParseReason reason, std::string_view snippet) {
    return Parsed<HeatingObservation>{
        std::nullopt,
        ParseDiagnostic{PromptId::P3, reason, detail::snippet_of(snippet)}};
  };

  // Drop markdown fence lines, then take the outermost balanced {...}.
  std::string cleaned;
  cleaned.reserve(text.size());
  size_t line_start = 0;
  while (line_start <= text.size()) {
    size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);
    size_t non_ws = line.find_first_not_of(" \t");
    bool fence = non_ws != std::string_view::npos &&
                 line.substr(non_ws).starts_with("```");
    if (!fence) {
      cleaned.append(line);
      cleaned.push_back('\n');
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }

  size_t open = cleaned.find('{');
  if (open == std::string::npos) return fail(ParseReason::MalformedJson, text);
  int depth = 0;
  size_t close = std::string::npos;
  for (size_t i = open; i < cleaned.size(); ++i) {
    if (cleaned[i] == '{') ++depth;
    if (cleaned[i] == '}' && --depth == 0) {
      close = i;
      break;
    }
  }
  if (close == std::string::npos) return fail(ParseReason::MalformedJson, text);

  nlohmann::json obj =
      nlohmann::json::parse(cleaned.substr(open, close - open + 1), nullptr,
                            /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) {
    return fail(ParseReason::MalformedJson, text);
  }

  HeatingObservation result;
  struct Field {
    std::string_view key;
    bool HeatingObservation::* member;
  };
  static constexpr std::array<Field, 5> fields = {{
      {"air vent", &HeatingObservation::air_vent},
      {"radiators", &HeatingObservation::radiators},
      {"water filled", &HeatingObservation::water_filled},
      {"electric panel heaters", &HeatingObservation::panel},
      {"electric storage heaters", &HeatingObservation::storage},
  }};
  for (const auto& field : fields) {
    bool found = false;
    for (const auto& [key, value] : obj.items()) {
      if (detail::lowercase(key) != field.key) continue;
      if (!value.is_string()) return fail(ParseReason::OutOfRange, value.dump());
      std::string v = detail::lowercase(value.get<std::string>());
      if (v == "y") {
        result.*(field.member) = true;
      } else if (v == "n") {
        result.*(field.member) = false;
      } else {
        return fail(ParseReason::OutOfRange, value.get<std::string>());
      }
      found = true;
      break;
    }
    if (!found) return fail(ParseReason::MissingField, field.key);
  }
  return {{result}, std::nullopt};
}

// Numbers immediately followed by a kWh unit token (kwh, kWh/m2, kWh/m²,
// "kwh per metre squared"). Two or more hits: the last two form the range;
// exactly one: point estimate.
inline Parsed<EnergyEstimate> parse_energy_estimate(std::string_view text) {
  std::string norm = detail::lowercase(text);
  // Unicode superscript two -> "2".
  size_t pos = 0;
  while ((pos = norm.find("\xc2\xb2", pos)) != std::string::npos) {
    norm.replace(pos, 2, "2");
  }

  static const std::regex number_unit(
      R"(([0-9]+(?:\.[0-9]+)?)\s*kwh)", std::regex::ECMAScript);
  std::vector<double> values;
  for (auto it = std::sregex_iterator(norm.begin(), norm.end(), number_unit);
       it != std::sregex_iterator(); ++it) {
    values.push_back(std::stod((*it)[1].str()));
  }
  if (values.empty()) {
    return {std::nullopt,
            ParseDiagnostic{PromptId::P6, ParseReason::NoAnswerFound,
                            detail::snippet_of(text)}};
  }
  if (values.size() == 1) {
    return {{EnergyEstimate{values[0], values[0]}}, std::nullopt};
  }
  double a = values[values.size() - 2];
  double b = values[values.size() - 1];
  return {{EnergyEstimate{std::min(a, b), std::max(a, b)}}, std::nullopt};
}

// Last letter A-G presented as a rating: "rating: X", "rating is X",
// "band X" or a standalone "(X)".
inline Parsed<EpcRating> parse_epc_rating(std::string_view text) {
  std::string input(text);
  static const std::regex contextual(
      R"(\b(?:[Rr]ating|[Bb]and)\s*(?:is|of|:)?\s*\(?([A-Ga-g])\)?(?![A-Za-z]))");
  static const std::regex parenthesized(R"(\(([A-G])\))");

  std::optional<char> best;
  size_t best_pos = 0;
  auto scan = [&](const std::regex& re) {
    for (auto it = std::sregex_iterator(input.begin(), input.end(), re);
         it != std::sregex_iterator(); ++it) {
      size_t at = static_cast<size_t>(it->position(1));
      if (!best || at >= best_pos) {
        best = it->str(1)[0];
        best_pos = at;
      }
    }
  };
  scan(contextual);
  scan(parenthesized);
  if (best) {
    if (auto rating = epc_from_letter(*best)) return {{*rating}, std::nullopt};
  }
  return {std::nullopt, ParseDiagnostic{PromptId::X1, ParseReason::NoAnswerFound,
                                        detail::snippet_of(text)}};
}

}  // namespace facade
