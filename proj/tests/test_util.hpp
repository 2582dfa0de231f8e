#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "wfc/records.hpp"
#include "wfc/workflow.hpp"

namespace wfc::test {

inline std::string fixture_path(const std::string& name) {
    return std::string(WFC_TEST_DATA) + "/" + name;
}

inline std::string fixture_text(const std::string& name) {
    return read_file(fixture_path(name));
}

inline WorkflowDoc fixture_doc(const std::string& name) {
    return parse_workflow(fixture_text(name), "fixture-repo", ".github/workflows/" + name);
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("wfc-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace wfc::test
