#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#ifndef EMBEDFORGE_FIXTURE_DIR
#define EMBEDFORGE_FIXTURE_DIR "tests/fixtures"
#endif

namespace testsupport {

inline std::string fixture(const std::string& name) {
    return (std::filesystem::path(EMBEDFORGE_FIXTURE_DIR) / name).string();
}

// Per-test scratch directory under the system temp root, wiped on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        root_ = std::filesystem::temp_directory_path() /
                ("embedforge_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(root_);
        std::filesystem::create_directories(root_);
    }
    ~TempDir() { std::filesystem::remove_all(root_); }

    std::string path(const std::string& name) const { return (root_ / name).string(); }
    std::string str() const { return root_.string(); }

private:
    std::filesystem::path root_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace testsupport
