#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lap::core {

using Tokens = std::vector<std::string>;

/// Whitespace tokenisation; no case folding or stemming.
Tokens tokenize(std::string_view text);
std::string join_tokens(const Tokens& tokens, std::string_view sep = " ");

enum class DescriptionSource { Original, Enhanced };

const char* to_string(DescriptionSource source);

struct Action {
  int id = 0;
  Tokens label;
  Tokens description;
};

/// Elaborated description per action id. Enhanced sets come from a file
/// produced offline; Original sets are just the labels.
struct DescriptionSet {
  std::map<int, Tokens> entries;
  DescriptionSource source = DescriptionSource::Original;
};

/// A task definition by action labels, in the task's canonical order.
struct TaskSpec {
  std::string name;
  std::vector<std::string> action_labels;
};

class ActionVocabulary {
 public:
  ActionVocabulary() = default;
  ActionVocabulary(std::vector<Action> actions, std::vector<std::string> task_names,
                   std::vector<std::vector<int>> task_actions, DescriptionSource source);

  int num_actions() const { return static_cast<int>(actions_.size()); }
  int num_tasks() const { return static_cast<int>(task_actions_.size()); }
  const Action& action(int id) const;
  const std::vector<Action>& actions() const { return actions_; }
  const std::vector<int>& task_actions(int task) const;
  const std::string& task_name(int task) const;
  DescriptionSource source() const { return source_; }
  bool contains(int id) const { return id >= 0 && id < num_actions(); }
  std::optional<int> find_label(std::string_view label) const;

  /// Copy with descriptions replaced. Coverage and length invariants are
  /// checked against this vocabulary.
  ActionVocabulary with_descriptions(const DescriptionSet& descriptions) const;

 private:
  void validate() const;

  std::vector<Action> actions_;
  std::vector<std::string> task_names_;
  std::vector<std::vector<int>> task_actions_;
  DescriptionSource source_ = DescriptionSource::Original;
};

/// Dense ids in order of first appearance across `tasks`. Descriptions, when
/// given, must cover every assigned id.
ActionVocabulary build_vocabulary(const std::vector<TaskSpec>& tasks,
                                  const std::optional<DescriptionSet>& descriptions = std::nullopt);

/// Reads `<id>\t<label>\t<description>` lines. The description column falls
/// back to the label when absent. Result is marked Enhanced.
DescriptionSet load_descriptions(const std::filesystem::path& path, const ActionVocabulary& vocab);

/// Writes the action table in the same line format load_descriptions reads.
void save_vocabulary_file(const std::filesystem::path& path, const ActionVocabulary& vocab);

/// Task table: `<task_id>\t<name>\t<space separated action ids>`.
void save_task_file(const std::filesystem::path& path, const ActionVocabulary& vocab);

/// Inverse of save_vocabulary_file + save_task_file.
ActionVocabulary load_vocabulary(const std::filesystem::path& vocab_path,
                                 const std::filesystem::path& task_path);

}  // namespace lap::core
