#ifndef RFID_ERRORS_HPP
#define RFID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rfid {

/** @brief Base of every error raised by the library. */
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed textual input (bad ID symbol, bad file line, bad spec field).
class ParseError : public Error
{
public:
    using Error::Error;
};

/// An identifier, signal, mask or answer has the wrong length.
class LengthError : public Error
{
public:
    using Error::Error;
};

/// More distinct IDs were requested than K bits can hold.
class CapacityError : public Error
{
public:
    using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error
{
public:
    using Error::Error;
};

/// The channel or population broke an assumption protocol P relies on
/// (distinct IDs, prefix-on decoding).
class AssumptionViolation : public Error
{
public:
    explicit AssumptionViolation(const std::string& what, std::string node_dump = {})
        : Error(what)
        , node_dump_(std::move(node_dump))
    {
    }

    /** @brief Serialized trace line of the node where the run stopped. */
    const std::string& node_dump() const noexcept { return node_dump_; }

private:
    std::string node_dump_;
};

/// Every position of a multi-responder answer ties at the maximum.
class NoSplitError : public AssumptionViolation
{
public:
    using AssumptionViolation::AssumptionViolation;
};

/// A trace is not the full binary tree a completed run must produce.
class StructuralError : public Error
{
public:
    using Error::Error;
};

/// Efficiency asked for a run that identified nothing.
class UndefinedMetricError : public Error
{
public:
    using Error::Error;
};

class ExportError : public Error
{
public:
    using Error::Error;
};

} // namespace rfid

#endif // RFID_ERRORS_HPP
