#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace promptevo {

/// A candidate instruction plus its lineage.
struct Prompt {
    std::string id;
    std::string text;
    std::size_t generation = 0;
    std::optional<std::string> parent_id;
    std::optional<std::string> mutation_note;

    bool operator==(const Prompt&) const = default;
};

/// Throws promptevo::Error when text is blank or lineage is inconsistent with generation.
void validate(const Prompt& prompt);

}  // namespace promptevo
