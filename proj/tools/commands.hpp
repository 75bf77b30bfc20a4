#pragma once

namespace trisieve::cli {

// Exit codes: 0 gate passed, 1 gate failed, 2 usage or config error,
// 3 runtime error.
int run(int argc, char** argv);

}  // namespace trisieve::cli
