pub mod geomcore;
pub mod acm;
pub mod reduce;
pub mod linkcat;
pub mod liecls;
pub mod manifest;
