#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cvp::fixtures {

// Names of the files write_demo_fixtures() produces, relative to the target.
std::vector<std::string> demo_fixture_files();

// Deterministic demo corpus, embeddings and baseline inputs. Running it twice
// produces identical bytes.
void write_demo_fixtures(const std::filesystem::path& dir);

}  // namespace cvp::fixtures
