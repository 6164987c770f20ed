#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pif/concepts.hpp"
#include "pif/pcturb.hpp"

namespace pif {

/// Exit codes: 0 success, 1 usage error, 2 processing error.
int cli_main(int argc, char** argv);

/// Applies `name=xi` for scalar concepts or `name=strength:hue` for hue concepts.
/// InvalidArgument on bad syntax or names, TypeMismatch on the wrong form,
/// OutOfRange on values outside the legal range.
void apply_assignment(ConceptParams& params, std::string_view assignment);

/// Comma-separated concept names, or "all".
ConceptMask parse_concept_list(std::string_view csv);

/// Expands directories into their PNG/JPEG files, sorted by name; files pass through.
std::vector<std::filesystem::path> collect_reference_files(const std::vector<std::string>& args);

}  // namespace pif
