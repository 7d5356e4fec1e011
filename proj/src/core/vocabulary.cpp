#include "core/vocabulary.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace lap::core {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

const char* to_string(DescriptionSource source) {
  return source == DescriptionSource::Enhanced ? "enhanced" : "original";
}

ActionVocabulary::ActionVocabulary(std::vector<Action> actions, std::vector<std::string> task_names,
                                   std::vector<std::vector<int>> task_actions,
                                   DescriptionSource source)
    : actions_(std::move(actions)),
      task_names_(std::move(task_names)),
      task_actions_(std::move(task_actions)),
      source_(source) {
  validate();
}

void ActionVocabulary::validate() const {
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    require(actions_[i].id == static_cast<int>(i), ErrorCode::Validation,
            "action ids must be dense and ordered; got " + std::to_string(actions_[i].id) +
                " at position " + std::to_string(i));
    require(!actions_[i].label.empty(), ErrorCode::Validation,
            "action " + std::to_string(i) + " has an empty label");
    require(!actions_[i].description.empty(), ErrorCode::Validation,
            "action " + std::to_string(i) + " has an empty description");
  }
  require(task_names_.size() == task_actions_.size(), ErrorCode::Internal, "task table size mismatch");
  for (std::size_t t = 0; t < task_actions_.size(); ++t) {
    std::set<int> distinct(task_actions_[t].begin(), task_actions_[t].end());
    require(distinct.size() == task_actions_[t].size(), ErrorCode::Validation,
            "task " + task_names_[t] + " lists an action twice");
    require(distinct.size() >= 2, ErrorCode::Validation,
            "task " + task_names_[t] + " must reference at least 2 actions");
    for (int id : distinct) {
      require(contains(id), ErrorCode::Validation,
              "task " + task_names_[t] + " references unknown action " + std::to_string(id));
    }
  }
}

const Action& ActionVocabulary::action(int id) const {
  require(contains(id), ErrorCode::InvalidArgument, "unknown action id " + std::to_string(id));
  return actions_[static_cast<std::size_t>(id)];
}

const std::vector<int>& ActionVocabulary::task_actions(int task) const {
  require(task >= 0 && task < num_tasks(), ErrorCode::InvalidArgument,
          "unknown task id " + std::to_string(task));
  return task_actions_[static_cast<std::size_t>(task)];
}

const std::string& ActionVocabulary::task_name(int task) const {
  require(task >= 0 && task < num_tasks(), ErrorCode::InvalidArgument,
          "unknown task id " + std::to_string(task));
  return task_names_[static_cast<std::size_t>(task)];
}

std::optional<int> ActionVocabulary::find_label(std::string_view label) const {
  const Tokens wanted = tokenize(label);
  for (const auto& a : actions_) {
    if (a.label == wanted) return a.id;
  }
  return std::nullopt;
}

ActionVocabulary ActionVocabulary::with_descriptions(const DescriptionSet& descriptions) const {
  std::vector<Action> actions = actions_;
  for (auto& a : actions) {
    auto it = descriptions.entries.find(a.id);
    require(it != descriptions.entries.end(), ErrorCode::Coverage,
            "no description for action " + std::to_string(a.id) + " (" + join_tokens(a.label) + ")");
    if (descriptions.source == DescriptionSource::Enhanced) {
      require(it->second.size() >= a.label.size(), ErrorCode::Validation,
              "enhanced description of action " + std::to_string(a.id) + " is shorter than its label");
    }
    a.description = it->second;
  }
  for (const auto& [id, tokens] : descriptions.entries) {
    require(contains(id), ErrorCode::Validation,
            "description for unknown action " + std::to_string(id));
  }
  return ActionVocabulary(std::move(actions), task_names_, task_actions_, descriptions.source);
}

ActionVocabulary build_vocabulary(const std::vector<TaskSpec>& tasks,
                                  const std::optional<DescriptionSet>& descriptions) {
  require(!tasks.empty(), ErrorCode::Validation, "task list is empty");
  std::vector<Action> actions;
  std::map<Tokens, int> ids;
  std::vector<std::string> names;
  std::vector<std::vector<int>> task_actions;
  for (const auto& spec : tasks) {
    std::set<Tokens> seen;
    std::vector<int> order;
    for (const auto& raw : spec.action_labels) {
      Tokens label = tokenize(raw);
      require(!label.empty(), ErrorCode::Validation, "empty action label in task " + spec.name);
      require(seen.insert(label).second, ErrorCode::Validation,
              "duplicate action label '" + raw + "' in task " + spec.name);
      auto [it, inserted] = ids.emplace(label, static_cast<int>(actions.size()));
      if (inserted) actions.push_back(Action{it->second, label, label});
      order.push_back(it->second);
    }
    names.push_back(spec.name);
    task_actions.push_back(std::move(order));
  }
  ActionVocabulary vocab(std::move(actions), std::move(names), std::move(task_actions),
                         DescriptionSource::Original);
  return descriptions ? vocab.with_descriptions(*descriptions) : vocab;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

int parse_id(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const int id = std::stoi(text, &used);
    if (used == text.size() && id >= 0) return id;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Parse, "bad id '" + text + "' " + where);
}

struct ActionRecord {
  int id;
  Tokens label;
  Tokens description;
};

std::vector<ActionRecord> read_action_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::vector<ActionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_tabs(line);
    const std::string where = "at " + path.string() + ":" + std::to_string(line_no);
    require(fields.size() >= 2 && fields.size() <= 3, ErrorCode::Parse, "expected 2 or 3 tab-separated fields " + where);
    ActionRecord rec{parse_id(fields[0], where), tokenize(fields[1]), {}};
    require(!rec.label.empty(), ErrorCode::Parse, "empty label " + where);
    rec.description = fields.size() == 3 ? tokenize(fields[2]) : Tokens{};
    if (rec.description.empty()) rec.description = rec.label;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

DescriptionSet load_descriptions(const std::filesystem::path& path, const ActionVocabulary& vocab) {
  DescriptionSet set;
  set.source = DescriptionSource::Enhanced;
  for (auto& rec : read_action_records(path)) {
    require(vocab.contains(rec.id), ErrorCode::Validation,
            "unknown action id " + std::to_string(rec.id) + " in " + path.string());
    require(set.entries.emplace(rec.id, std::move(rec.description)).second, ErrorCode::Duplicate,
            "duplicate entry for action " + std::to_string(rec.id) + " in " + path.string());
  }
  for (const auto& a : vocab.actions()) {
    require(set.entries.count(a.id) == 1, ErrorCode::Coverage,
            "description file " + path.string() + " has no entry for action " + std::to_string(a.id));
  }
  return set;
}

void save_vocabulary_file(const std::filesystem::path& path, const ActionVocabulary& vocab) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  out << "# source=" << to_string(vocab.source()) << '\n';
  for (const auto& a : vocab.actions()) {
    out << a.id << '\t' << join_tokens(a.label) << '\t' << join_tokens(a.description) << '\n';
  }
}

void save_task_file(const std::filesystem::path& path, const ActionVocabulary& vocab) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  for (int t = 0; t < vocab.num_tasks(); ++t) {
    out << t << '\t' << vocab.task_name(t) << '\t';
    const auto& ids = vocab.task_actions(t);
    for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? " " : "") << ids[i];
    out << '\n';
  }
}

ActionVocabulary load_vocabulary(const std::filesystem::path& vocab_path,
                                 const std::filesystem::path& task_path) {
  DescriptionSource source = DescriptionSource::Original;
  {
    std::ifstream in(vocab_path);
    std::string first;
    if (std::getline(in, first) && first == "# source=enhanced") source = DescriptionSource::Enhanced;
  }
  auto records = read_action_records(vocab_path);
  std::vector<Action> actions(records.size());
  std::vector<bool> filled(records.size(), false);
  for (auto& rec : records) {
    require(rec.id < static_cast<int>(records.size()), ErrorCode::Validation,
            "action ids in " + vocab_path.string() + " are not dense");
    require(!filled[static_cast<std::size_t>(rec.id)], ErrorCode::Duplicate,
            "duplicate action id " + std::to_string(rec.id) + " in " + vocab_path.string());
    filled[static_cast<std::size_t>(rec.id)] = true;
    actions[static_cast<std::size_t>(rec.id)] = Action{rec.id, std::move(rec.label), std::move(rec.description)};
  }

  std::ifstream in(task_path);
  require(in.good(), ErrorCode::Io, "cannot open " + task_path.string());
  std::vector<std::string> names;
  std::vector<std::vector<int>> tasks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_tabs(line);
    const std::string where = "at " + task_path.string() + ":" + std::to_string(line_no);
    require(fields.size() == 3, ErrorCode::Parse, "expected 3 tab-separated fields " + where);
    require(parse_id(fields[0], where) == static_cast<int>(names.size()), ErrorCode::Parse,
            "task ids must be dense and ordered " + where);
    names.push_back(fields[1]);
    std::vector<int> ids;
    for (const auto& tok : tokenize(fields[2])) ids.push_back(parse_id(tok, where));
    tasks.push_back(std::move(ids));
  }
  return ActionVocabulary(std::move(actions), std::move(names), std::move(tasks), source);
}

}  // namespace lap::core
