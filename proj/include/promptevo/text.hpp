#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace promptevo {

/// Lowercases ASCII and splits on whitespace and punctuation boundaries.
/// Runs of ASCII alphanumerics (and any non-ASCII byte) form word tokens; every
/// other non-space character becomes a single-character token.
std::vector<std::string> tokenize(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

/// Replaces every `{name}` occurrence found in `vars`; unknown placeholders are left as is.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars);

}  // namespace promptevo
