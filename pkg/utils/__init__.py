# Utils package for exdyn
