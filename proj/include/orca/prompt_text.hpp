#ifndef ORCA_PROMPT_TEXT_HPP
#define ORCA_PROMPT_TEXT_HPP

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "orca/error.hpp"

namespace orca {

enum class PromptVariant {
    full,         // ACTOR, INFORMATION, TARGET, FEATURES, DATA
    light,        // ACTOR, TARGET (ablation)
    no_features,  // full minus FEATURES (ablation)
};

std::string to_string(PromptVariant v);
PromptVariant prompt_variant_from_string(const std::string& s);

// Five-section prompt. Section bodies may carry the placeholders {F},
// {M}, {T} (data dimensions) and {FEATURES} (feature list), interpolated
// at render time.
struct PromptTemplate {
    std::string actor;
    std::string information;
    std::string target;
    std::string features;
    std::string data_decl;
    PromptVariant variant = PromptVariant::full;

    // The wording this artifact ships with.
    static PromptTemplate standard(PromptVariant variant);
};

struct DatasetMeta {
    std::size_t num_features = 0;
    std::size_t num_buoys = 0;
    std::size_t num_steps = 0;
    std::vector<std::string> feature_names;
};

struct RenderedPrompt {
    std::string text;
    // Section label and [begin, end) character span within text, in
    // render order.
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> sections;
};

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const DatasetMeta& meta);

// Lowercases and splits on whitespace and punctuation; digits and letters
// survive, everything else separates.
std::vector<std::string> tokenize(const std::string& text);

// Dense token ids built from a corpus; PAD is always id 0, UNK id 1.
class Vocabulary {
public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kUnk = 1;

    static Vocabulary build(const std::vector<std::string>& corpus_tokens);

    std::size_t size() const { return names_.size(); }
    std::size_t id_of(const std::string& token) const {
        auto it = ids_.find(token);
        return it == ids_.end() ? kUnk : it->second;
    }
    const std::string& name_of(std::size_t id) const { return names_.at(id); }

private:
    std::unordered_map<std::string, std::size_t> ids_;
    std::vector<std::string> names_;
};

} // namespace orca

#endif
