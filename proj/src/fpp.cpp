namespace sdens {}
