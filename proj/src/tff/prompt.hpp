#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tff/types.hpp"

namespace tff {

// The authored source tasks in the order prompts consume them. N-shot prompts
// always take a prefix of this order, so the order is part of the contract.
class SourceLibrary {
 public:
  explicit SourceLibrary(std::vector<TaskFrameSpec> sources);

  // turn_screw, wipe_table, open_door_from_doorknob, cut_sandwich,
  // slide_box_upward_on_wall.
  static const SourceLibrary& builtin();

  const std::vector<TaskFrameSpec>& sources() const { return sources_; }
  std::size_t size() const { return sources_.size(); }

 private:
  std::vector<TaskFrameSpec> sources_;
};

// Reads a library fixture: a JSON array of spec records in prompt order.
SourceLibrary load_source_library(const std::string& path);
// Serializes a library in the fixture format (pretty-printed, newline-terminated).
std::string source_library_to_json_text(const SourceLibrary& library);

struct PromptBundle {
  std::string text;
  int shots = 0;
  std::vector<TaskName> source_names;
  TaskName target;
};

// Yes/no gate asking whether a task is primitive under the task frame
// formalism. Fixed template, only the task text varies.
std::string build_primitiveness_prompt(const TaskName& task);

enum class PrimitivenessAnswer { Yes, No, Ambiguous };

std::string_view primitiveness_answer_name(PrimitivenessAnswer answer);

// Case-insensitive scan of the reply's first word; "yes"/"no" decides,
// anything else is Ambiguous.
PrimitivenessAnswer interpret_primitiveness_reply(std::string_view reply);

// Renders the first `shots` sources as "# Source function k" blocks followed
// by the target header block, joined with single blank lines.
PromptBundle build_nshot_prompt(const SourceLibrary& library, const TaskName& target,
                                int shots);

}  // namespace tff
