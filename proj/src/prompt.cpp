#include "promptevo/prompt.hpp"

#include "promptevo/error.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

void validate(const Prompt& prompt) {
    if (trim(prompt.text).empty()) throw Error("prompt '" + prompt.id + "' has empty text");
    if (prompt.generation == 0 && prompt.parent_id)
        throw Error("generation-0 prompt '" + prompt.id + "' must not have a parent");
    if (prompt.generation > 0 && !prompt.parent_id)
        throw Error("prompt '" + prompt.id + "' of generation " + std::to_string(prompt.generation) +
                    " has no parent");
}

}  // namespace promptevo
