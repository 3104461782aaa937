# path: settings/case1_settings.py
# Case 1 in Python form, equivalent to case1.cfg

grid = dict(
    extents = [64, 64]      ,
    lengths = [1.0, 1.0]    , # m
)

physics = dict(
    rayleigh = 1e6          ,
    prandtl = 0.705         ,
    nu = 1.5e-5             , # m^2/s
    dt = 0.5                , # s
)

boundary = dict(
    t_hot = 307.75          , # K
    t_cold = 288.15         , # K
)

hybrid = dict(
    residual_threshold = 5  ,
    total_steps = 5000      ,
    tl_epochs = 2           ,
    burst_len = 10          ,
    tl_buffer = 3           ,
)

training = dict(
    initial_epochs = 30     ,
    batch_size = 4096       , # cells
    seed = 0                ,
)

model = dict(
    kind = 'FVMN'           ,
    hidden = 128            ,
    width = 16              ,
    modes = 8               ,
)

output = dict(
    directory = 'output'    ,
    run_name = 'case1'      ,
)
