#pragma once

#include <stdexcept>
#include <string>

namespace sitedelta {

/// Base error for all library failures (load, schema, value, I/O).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class LoadError : public Error {
public:
    explicit LoadError(const std::string& what) : Error(what) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error(what) {}
};

class ValueError : public Error {
public:
    explicit ValueError(const std::string& what) : Error(what) {}
};

}  // namespace sitedelta
