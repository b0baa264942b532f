#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "tff/errors.hpp"
#include "tff/prompt.hpp"

using namespace tff;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file ", path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string golden(const std::string& name) {
  return read_file(std::string(TFF_SOURCE_DIR) + "/tests/golden/" + name);
}

}  // namespace

TEST_CASE("the builtin library carries the five sources in prompt order") {
  const SourceLibrary& library = SourceLibrary::builtin();
  REQUIRE(library.size() == 5);
  CHECK(library.sources()[0].task().normalized == "turn_screw");
  CHECK(library.sources()[1].task().normalized == "wipe_table");
  CHECK(library.sources()[2].task().normalized == "open_door_from_doorknob");
  CHECK(library.sources()[3].task().normalized == "cut_sandwich");
  CHECK(library.sources()[4].task().normalized == "slide_box_upward_on_wall");
}

TEST_CASE("libraries reject duplicate or empty content") {
  std::vector<TaskFrameSpec> sources = SourceLibrary::builtin().sources();
  sources.push_back(sources.front());
  CHECK_THROWS_AS(SourceLibrary(std::move(sources)), Error);
  CHECK_THROWS_AS(SourceLibrary(std::vector<TaskFrameSpec>{}), Error);
}

TEST_CASE("n-shot prompts match their golden files") {
  TaskName target = normalize_task_name("cut pizza");
  for (int shots : {0, 1, 3, 5}) {
    PromptBundle bundle = build_nshot_prompt(SourceLibrary::builtin(), target, shots);
    CHECK(bundle.shots == shots);
    CHECK(bundle.text ==
          golden("prompt_cut_pizza_" + std::to_string(shots) + "shot.txt"));
  }
}

TEST_CASE("lower-shot prompts are prefixes of the five-shot prompt") {
  TaskName target = normalize_task_name("cut pizza");
  const SourceLibrary& library = SourceLibrary::builtin();
  std::string five = build_nshot_prompt(library, target, 5).text;
  for (int shots : {1, 3}) {
    std::string text = build_nshot_prompt(library, target, shots).text;
    std::string sources_part = text.substr(0, text.find("# Target function"));
    CHECK(five.substr(0, sources_part.size()) == sources_part);
  }
}

TEST_CASE("prompt structure: source blocks in order, then the target stub") {
  TaskName target = normalize_task_name("open bottle");
  PromptBundle bundle = build_nshot_prompt(SourceLibrary::builtin(), target, 5);
  size_t last = 0;
  for (int k = 1; k <= 5; ++k) {
    size_t pos = bundle.text.find("# Source function " + std::to_string(k));
    REQUIRE(pos != std::string::npos);
    CHECK(pos >= last);
    last = pos;
  }
  size_t target_pos = bundle.text.find("# Target function\ndef open_bottle(");
  REQUIRE(target_pos != std::string::npos);
  CHECK(target_pos > last);
  CHECK(bundle.source_names.size() == 5);
  CHECK(bundle.target.normalized == "open_bottle");
  // one blank line between blocks, none inside
  CHECK(bundle.text.find("\n\n\n") == std::string::npos);
}

TEST_CASE("zero-shot prompts contain only the target stub") {
  PromptBundle bundle = build_nshot_prompt(SourceLibrary::builtin(),
                                           normalize_task_name("cut pizza"), 0);
  CHECK(bundle.text.rfind("# Target function\n", 0) == 0);
  CHECK(bundle.text.find("# Source function") == std::string::npos);
}

TEST_CASE("shot counts outside the library range are rejected") {
  TaskName target = normalize_task_name("cut pizza");
  CHECK_THROWS_AS(build_nshot_prompt(SourceLibrary::builtin(), target, -1), Error);
  try {
    build_nshot_prompt(SourceLibrary::builtin(), target, 6);
    FAIL("expected a throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ShotCountOutOfRange);
  }
}

TEST_CASE("the primitiveness question matches its golden file") {
  CHECK(build_primitiveness_prompt(normalize_task_name("open bottle")) ==
        golden("primitiveness_open_bottle.txt"));
}

TEST_CASE("the primitiveness question substitutes the display name") {
  std::string prompt = build_primitiveness_prompt(normalize_task_name("Open the Door"));
  CHECK(prompt.find("is \"open door\" a primitive task?") != std::string::npos);
}

TEST_CASE("primitiveness replies are judged by their first word") {
  CHECK(interpret_primitiveness_reply("yes") == PrimitivenessAnswer::Yes);
  CHECK(interpret_primitiveness_reply("Yes, it is primitive.") ==
        PrimitivenessAnswer::Yes);
  CHECK(interpret_primitiveness_reply("  NO") == PrimitivenessAnswer::No);
  CHECK(interpret_primitiveness_reply("No. It needs several strategies.") ==
        PrimitivenessAnswer::No);
  CHECK(interpret_primitiveness_reply("\"Yes\"") == PrimitivenessAnswer::Yes);
  CHECK(interpret_primitiveness_reply("Maybe") == PrimitivenessAnswer::Ambiguous);
  CHECK(interpret_primitiveness_reply("") == PrimitivenessAnswer::Ambiguous);
  CHECK(interpret_primitiveness_reply("I would say it depends") ==
        PrimitivenessAnswer::Ambiguous);
}

TEST_CASE("a library round trips through its fixture format") {
  const SourceLibrary& library = SourceLibrary::builtin();
  std::string path = "test_library_roundtrip.json";
  {
    std::ofstream out(path, std::ios::binary);
    out << source_library_to_json_text(library);
  }
  SourceLibrary loaded = load_source_library(path);
  REQUIRE(loaded.size() == library.size());
  for (size_t i = 0; i < library.size(); ++i)
    CHECK(loaded.sources()[i] == library.sources()[i]);
  std::remove(path.c_str());
}

TEST_CASE("the shipped library fixture equals the builtin library") {
  SourceLibrary loaded =
      load_source_library(std::string(TFF_SOURCE_DIR) + "/fixtures/source_library.json");
  REQUIRE(loaded.size() == SourceLibrary::builtin().size());
  for (size_t i = 0; i < loaded.size(); ++i)
    CHECK(loaded.sources()[i] == SourceLibrary::builtin().sources()[i]);
}

TEST_CASE("loading a missing library file fails cleanly") {
  CHECK_THROWS_AS(load_source_library("no_such_file.json"), Error);
}
