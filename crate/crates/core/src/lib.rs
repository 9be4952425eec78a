//! Exact subtour-LP machinery for the 1,2-TSP.
//!
//! An instance is the graph of its cost-1 edges; every other pair of cities
//! costs 2. The crate solves the fractional 2-matching LP, the subtour LP
//! (cutting planes over an exact rational simplex), the integer TSP and the
//! minimum-cost 2-matching, builds tours from fractional 2-matchings with
//! guaranteed ratios, constructs combinatorial dual certificates, enumerates
//! biconnected instances to measure the integrality gap, and searches for
//! worst-case costs at a fixed LP vertex.

pub mod costsearch;
pub mod dualcert;
pub mod enumerate;
pub mod f2m;
pub mod instance;
pub mod lp;
pub mod mincut;
pub mod rational;
pub mod subtour;
pub mod tourbuild;

pub use instance::{Edge, Instance, InstanceError, NodeId, Tour};
pub use rational::{rat, Rational};
pub use subtour::FracSolution;
