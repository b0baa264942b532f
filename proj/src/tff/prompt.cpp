#include "tff/prompt.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tff/spec_json.hpp"

namespace tff {

SourceLibrary::SourceLibrary(std::vector<TaskFrameSpec> sources)
    : sources_(std::move(sources)) {
  if (sources_.empty()) {
    raise(ErrorCode::InvalidArgument, "source library has no tasks");
  }
  std::set<std::string> names;
  for (const TaskFrameSpec& spec : sources_) {
    if (!names.insert(spec.task().normalized).second) {
      raise(ErrorCode::InvalidArgument,
            "duplicate source task " + spec.task().normalized);
    }
  }
}

const SourceLibrary& SourceLibrary::builtin() {
  auto authored = [](const char* name, const char* coords,
                     std::vector<AxisDirective> actives) {
    return TaskFrameSpec::create(normalize_task_name(name),
                                 make_coordinate_setting(coords),
                                 std::move(actives));
  };
  static const SourceLibrary library(std::vector<TaskFrameSpec>{
      authored("turn screw",
               "attached to the screw head, z axis points into the screw",
               {make_directive(Axis::TZ, -5, Unit::Newton),
                make_directive(Axis::RZ, 5, Unit::RadPerSec)}),
      authored("wipe table",
               "attached to the table surface, x axis along the wiping stroke, "
               "z axis points up from the table",
               {make_directive(Axis::TX, 5, Unit::CmPerSec),
                make_directive(Axis::TZ, -5, Unit::Newton)}),
      authored("open door from doorknob",
               "attached to the doorknob center, z axis along the knob rotation axis",
               {make_directive(Axis::RZ, 2, Unit::RadPerSec)}),
      authored("cut sandwich",
               "attached to the knife edge above the sandwich, z axis points up "
               "from the cutting board",
               {make_directive(Axis::TZ, -2, Unit::Centimeter)}),
      authored("slide box upward on wall",
               "attached to the box face touching the wall, z axis points up "
               "along the wall, x axis points out of the wall",
               {make_directive(Axis::TZ, 5, Unit::CmPerSec),
                make_directive(Axis::TX, -5, Unit::Newton)}),
  });
  return library;
}

SourceLibrary load_source_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open source library " + path);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::InvalidSpec, path + ": " + e.what());
  }
  if (!doc.is_array()) {
    raise(ErrorCode::InvalidSpec, path + ": expected an array of spec records");
  }
  std::vector<TaskFrameSpec> sources;
  sources.reserve(doc.size());
  for (const auto& record : doc) {
    sources.push_back(spec_from_json(record));
  }
  return SourceLibrary(std::move(sources));
}

std::string source_library_to_json_text(const SourceLibrary& library) {
  nlohmann::json doc = nlohmann::json::array();
  for (const TaskFrameSpec& spec : library.sources()) {
    doc.push_back(spec_to_json(spec));
  }
  return doc.dump(2) + "\n";
}

std::string build_primitiveness_prompt(const TaskName& task) {
  std::ostringstream out;
  out << "We specify primitive tasks based on the concept of task frame "
         "formalism in robotics.\n"
      << "For example, \"open door\", \"slice bread\", \"insert card\" are "
         "primitive tasks because they use a single control strategy and "
         "coordinate setting. While \"assembly computer\", \"make coffee\", "
         "\"drive car\" are not primitive tasks because they must be decomposed "
         "into several low-level tasks in single control strategies and "
         "coordinate settings.\n"
      << "So, is \"" << task.display()
      << "\" a primitive task? Just answer yes or no.";
  return out.str();
}

std::string_view primitiveness_answer_name(PrimitivenessAnswer answer) {
  switch (answer) {
    case PrimitivenessAnswer::Yes: return "yes";
    case PrimitivenessAnswer::No: return "no";
    case PrimitivenessAnswer::Ambiguous: return "ambiguous";
  }
  return "";
}

PrimitivenessAnswer interpret_primitiveness_reply(std::string_view reply) {
  size_t i = 0;
  while (i < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[i]))) {
    ++i;
  }
  std::string word;
  while (i < reply.size() && std::isalpha(static_cast<unsigned char>(reply[i]))) {
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(reply[i]))));
    ++i;
  }
  if (word == "yes") return PrimitivenessAnswer::Yes;
  if (word == "no") return PrimitivenessAnswer::No;
  return PrimitivenessAnswer::Ambiguous;
}

PromptBundle build_nshot_prompt(const SourceLibrary& library, const TaskName& target,
                                int shots) {
  if (shots < 0 || static_cast<size_t>(shots) > library.size()) {
    raise(ErrorCode::ShotCountOutOfRange,
          "shots must be between 0 and " + std::to_string(library.size()) +
              ", got " + std::to_string(shots));
  }

  PromptBundle bundle;
  bundle.shots = shots;
  bundle.target = target;

  std::string text;
  for (int k = 1; k <= shots; ++k) {
    const TaskFrameSpec& source = library.sources()[static_cast<size_t>(k - 1)];
    bundle.source_names.push_back(source.task());
    if (!text.empty()) text += "\n";
    text += render_function(source, FunctionRole::source(k));
  }
  TaskFrameSpec stub =
      TaskFrameSpec::create(target, make_coordinate_setting(""), {});
  if (!text.empty()) text += "\n";
  text += render_function(stub, FunctionRole::target());
  bundle.text = std::move(text);
  return bundle;
}

}  // namespace tff
