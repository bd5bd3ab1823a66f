#include "hdpca/errors.hpp"

#include <sstream>

namespace hdpca {

namespace {

std::string sub_edge_message(const std::vector<std::size_t>& indices, double edge)
{
    std::ostringstream os;
    os << "leading eigenvalue(s) at or below the bulk edge " << edge << " at index";
    if (indices.size() > 1) os << "es";
    for (std::size_t i = 0; i < indices.size(); ++i) os << (i == 0 ? " " : ", ") << indices[i];
    return os.str();
}

}  // namespace

SubEdgeError::SubEdgeError(std::vector<std::size_t> indices, double edge)
    : NumericError(sub_edge_message(indices, edge)), indices_(std::move(indices)), edge_(edge)
{
}

int exit_code_for(const Error& e) noexcept
{
    if (dynamic_cast<const RegimeError*>(&e)) return 4;
    if (dynamic_cast<const NumericError*>(&e)) return 3;
    return 2;
}

}  // namespace hdpca
