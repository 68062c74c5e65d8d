#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "triplesum/corpus.hpp"
#include "triplesum/vocabulary.hpp"

namespace triplesum::cli {

struct Command {
  CLI::App* app = nullptr;
  std::function<void()> run;
};

void add_corpus_commands(CLI::App& root, std::vector<Command>& out);
void add_model_commands(CLI::App& root, std::vector<Command>& out);
void add_eval_commands(CLI::App& root, std::vector<Command>& out);

// Shared by the command modules.

std::ifstream open_input(const std::string& path);
// Creates missing parent directories; failures are runtime errors.
std::ofstream open_output(const std::string& path);

// `dir/corpus.jsonl` + ".valid.jsonl" -> `dir/corpus.valid.jsonl`.
std::string sibling(const std::string& path, const std::string& suffix);

// Throws UsageError when an output would overwrite one of the inputs.
void check_outputs(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs);

std::vector<AlignedExample> load_corpus(const std::string& path);
Vocabulary load_vocabulary(const std::string& path, VocabSide expected);
SurfaceLexicon load_lexicon(const std::string& path);

}  // namespace triplesum::cli
