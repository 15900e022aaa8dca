#include "orca/prompt_text.hpp"

#include <cctype>

#include "orca/buoy.hpp"

namespace orca {

std::string to_string(PromptVariant v) {
    switch (v) {
        case PromptVariant::full: return "full";
        case PromptVariant::light: return "light";
        case PromptVariant::no_features: return "no-features";
    }
    return "full";
}

PromptVariant prompt_variant_from_string(const std::string& s) {
    if (s == "full") return PromptVariant::full;
    if (s == "light") return PromptVariant::light;
    if (s == "no-features" || s == "no_features") return PromptVariant::no_features;
    throw ConfigError("unknown prompt variant '" + s + "' (expected full|light|no-features)");
}

PromptTemplate PromptTemplate::standard(PromptVariant variant) {
    PromptTemplate t;
    t.variant = variant;
    t.actor = "You are a marine scientist.";
    t.information =
        "The input contains {F} features observed by {M} stationary ocean buoys over {T} "
        "consecutive time intervals.";
    t.target =
        "I will provide you with several sets of data describing the marine environment. Please "
        "utilize your own expertise and this data to predict the significant wave heights.";
    t.features = "The observed features are {FEATURES}.";
    t.data_decl =
        "The observations are numerical floating point values, not character strings.";
    return t;
}

namespace {

void replace_all(std::string& s, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = s.find(key, pos)) != std::string::npos) {
        s.replace(pos, key.size(), value);
        pos += value.size();
    }
}

std::string interpolate(std::string body, const DatasetMeta& meta) {
    replace_all(body, "{F}", std::to_string(meta.num_features));
    replace_all(body, "{M}", std::to_string(meta.num_buoys));
    replace_all(body, "{T}", std::to_string(meta.num_steps));
    if (body.find("{FEATURES}") != std::string::npos) {
        std::string list;
        for (std::size_t i = 0; i < meta.feature_names.size(); ++i) {
            if (i > 0) {
                list += (i + 1 == meta.feature_names.size()) ? " and " : ", ";
            }
            list += feature_long_name(meta.feature_names[i]) + " (" + meta.feature_names[i] + ")";
        }
        replace_all(body, "{FEATURES}", list);
    }
    return body;
}

} // namespace

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const DatasetMeta& meta) {
    std::vector<std::pair<std::string, std::string>> parts;
    parts.emplace_back("ACTOR", tmpl.actor);
    if (tmpl.variant != PromptVariant::light) {
        parts.emplace_back("INFORMATION", tmpl.information);
    }
    parts.emplace_back("TARGET", tmpl.target);
    if (tmpl.variant == PromptVariant::full) {
        parts.emplace_back("FEATURES", tmpl.features);
    }
    if (tmpl.variant != PromptVariant::light) {
        parts.emplace_back("DATA", tmpl.data_decl);
    }

    RenderedPrompt out;
    for (const auto& [label, body] : parts) {
        if (!out.text.empty()) {
            out.text += ' ';
        }
        const std::size_t begin = out.text.size();
        out.text += label + ": " + interpolate(body, meta);
        out.sections.emplace_back(label, std::make_pair(begin, out.text.size()));
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(current);
    }
    return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus_tokens) {
    Vocabulary v;
    v.names_ = {"<pad>", "<unk>"};
    v.ids_["<pad>"] = kPad;
    v.ids_["<unk>"] = kUnk;
    for (const auto& tok : corpus_tokens) {
        if (v.ids_.emplace(tok, v.names_.size()).second) {
            v.names_.push_back(tok);
        }
    }
    return v;
}

} // namespace orca
