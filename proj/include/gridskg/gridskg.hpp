#pragma once

#include "gridskg/error.hpp"
#include "gridskg/export.hpp"
#include "gridskg/format.hpp"
#include "gridskg/geometry.hpp"
#include "gridskg/grid.hpp"
#include "gridskg/kg.hpp"
#include "gridskg/kg_graph.hpp"
#include "gridskg/kg_io.hpp"
#include "gridskg/orientation.hpp"
#include "gridskg/routing.hpp"
#include "gridskg/simplify.hpp"
#include "gridskg/streetnet.hpp"
