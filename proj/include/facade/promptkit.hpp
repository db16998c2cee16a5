#pragma once

// Prompt template registry and payload rendering. Templates live as UTF-8
// text files (P1.txt .. P7.txt, X1.txt, X2.txt) so they can be diffed and
// audited as data rather than buried in code. P6, P7 and X1 carry the
// literal placeholder "[P1 to P5 output]" which rendering replaces with the
// accumulated stage summary.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "facade/core.hpp"

namespace facade {

enum class PromptId : int { P1 = 1, P2, P3, P4, P5, P6, P7, X1, X2 };

inline constexpr std::array<PromptId, 9> kAllPromptIds = {
    PromptId::P1, PromptId::P2, PromptId::P3, PromptId::P4, PromptId::P5,
    PromptId::P6, PromptId::P7, PromptId::X1, PromptId::X2};

inline std::string_view to_string(PromptId id) {
  switch (id) {
    case PromptId::P1: return "P1";
    case PromptId::P2: return "P2";
    case PromptId::P3: return "P3";
    case PromptId::P4: return "P4";
    case PromptId::P5: return "P5";
    case PromptId::P6: return "P6";
    case PromptId::P7: return "P7";
    case PromptId::X1: return "X1";
    case PromptId::X2: return "X2";
  }
  return "?";
}

inline std::optional<PromptId> prompt_id_from_string(std::string_view name) {
  for (PromptId id : kAllPromptIds) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

// P6, P7 and X1 summarize the earlier stages; they must be rendered with
// context. All others must not.
inline constexpr bool prompt_takes_context(PromptId id) {
  return id == PromptId::P6 || id == PromptId::P7 || id == PromptId::X1;
}

// X1 is text-only; every other prompt ships images.
inline constexpr bool prompt_takes_images(PromptId id) {
  return id != PromptId::X1;
}

// X1/X2 are authored in the house style of the others but are not verbatim
// source material; the CLI flags them when displayed.
inline constexpr bool prompt_is_verbatim(PromptId id) {
  return id != PromptId::X1 && id != PromptId::X2;
}

struct PromptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingContext : PromptError {
  explicit MissingContext(PromptId id)
      : PromptError("prompt " + std::string(to_string(id)) +
                    " requires stage-summary context") {}
};
struct UnexpectedContext : PromptError {
  explicit UnexpectedContext(PromptId id)
      : PromptError("prompt " + std::string(to_string(id)) +
                    " does not take context") {}
};
struct IncompleteStages : PromptError {
  explicit IncompleteStages(PromptId id)
      : PromptError("stage " + std::string(to_string(id)) +
                    " has no raw output; cannot build summary") {}
};

struct PromptPayload {
  PromptId prompt_id;
  std::string text;
  std::vector<std::string> images;  // URIs or data: URIs, in order
};

inline constexpr std::string_view kContextPlaceholder = "[P1 to P5 output]";

class PromptRegistry {
 public:
  static PromptRegistry load(const std::filesystem::path& dir) {
    PromptRegistry reg;
    for (PromptId id : kAllPromptIds) {
      auto path = dir / (std::string(to_string(id)) + ".txt");
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        throw PromptError("missing prompt template: " + path.string());
      }
      std::ostringstream buf;
      buf << in.rdbuf();
      reg.templates_[id] = std::move(buf).str();
    }
    return reg;
  }

  const std::string& template_text(PromptId id) const {
    return templates_.at(id);
  }

  PromptPayload render(PromptId id, std::vector<std::string> images,
                       std::optional<std::string> context = std::nullopt) const {
    if (prompt_takes_context(id) && !context) throw MissingContext(id);
    if (!prompt_takes_context(id) && context) throw UnexpectedContext(id);

    std::string text = templates_.at(id);
    if (context) {
      size_t pos;
      while ((pos = text.find(kContextPlaceholder)) != std::string::npos) {
        text.replace(pos, kContextPlaceholder.size(), *context);
      }
    }
    return PromptPayload{id, std::move(text), std::move(images)};
  }

 private:
  std::map<PromptId, std::string> templates_;
};

inline std::string_view stage_label(PromptId id) {
  switch (id) {
    case PromptId::P1: return "Building age";
    case PromptId::P2: return "Building type";
    case PromptId::P3: return "Heating observations";
    case PromptId::P4: return "Window type";
    case PromptId::P5: return "Lighting";
    default: return to_string(id);
  }
}

// Deterministic concatenation of the five stage answers plus the rule-base
// result; this is the block substituted into P6/P7/X1.
inline std::string stage_summary(
    const std::map<PromptId, std::string>& raw_texts, HeatingType heating,
    EnergySource source) {
  std::ostringstream out;
  for (PromptId id : {PromptId::P1, PromptId::P2, PromptId::P3, PromptId::P4,
                      PromptId::P5}) {
    auto it = raw_texts.find(id);
    if (it == raw_texts.end() || it->second.empty()) throw IncompleteStages(id);
    out << "### " << stage_label(id) << "\n" << it->second << "\n\n";
  }
  out << "### Derived heating\nMain heating: " << to_string(heating)
      << "; Energy source: " << to_string(source);
  return std::move(out).str();
}

}  // namespace facade
