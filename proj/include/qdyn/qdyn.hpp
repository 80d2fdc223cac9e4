#pragma once

#include "qdyn/errors.hpp"
#include "qdyn/rational.hpp"
#include "qdyn/boundary.hpp"
#include "qdyn/quadrature.hpp"
#include "qdyn/singularity.hpp"
#include "qdyn/dynamics.hpp"
#include "qdyn/droplet_graph.hpp"
#include "qdyn/exemplars.hpp"
#include "qdyn/theorem.hpp"
#include "qdyn/io.hpp"
